/** Pure string renderers: scene -> SVG markup, scene -> panel markup.
 *
 * Building markup as strings keeps rendering a pure function (snapshot-
 * friendly) and leaves all event wiring to main.ts, which attaches
 * delegated listeners on the containers.
 */

import type { ErrorScene, Scene, SceneEdge, SceneNode } from "./scene.js";

const SYMBOL_GLYPHS: Record<string, string> = {
  radio_checked: "◉ ", // ◉
  radio_unchecked: "○ ", // ○
  none: "",
};

export function escapeXml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&apos;");
}

function nodeClasses(node: SceneNode): string {
  const classes = ["node", `kind-${node.kind}`];
  if (node.grayed) classes.push("grayed");
  if (node.frontier) classes.push("frontier");
  if (node.open) classes.push("open");
  return classes.join(" ");
}

function renderNode(node: SceneNode): string {
  const fontSize = 12 * node.scale;
  const pad = 6 * node.scale;
  const label = escapeXml(node.label);
  const chosen = node.chosen.length
    ? `<text class="chosen" x="${node.x + pad}" y="${
        node.y + node.height - pad
      }" font-size="${fontSize * 0.85}">${escapeXml(node.chosen.join(", "))}</text>`
    : "";
  // Multi-choice questions get a trailing pseudo-button that commits the
  // staged selection; single-choice answers post immediately.
  const buttonLabels = node.open
    ? node.kind === "multi"
      ? [...node.answers, "✓ apply"]
      : node.answers
    : [];
  const buttons = buttonLabels
    .map(
      (answer, i) =>
        `<text class="answer-button" data-node="${escapeXml(node.id)}" ` +
        `data-answer="${escapeXml(answer)}" x="${node.x + pad + i * 60 * node.scale}" ` +
        `y="${node.y + node.height + fontSize}" font-size="${fontSize}">` +
        `[${escapeXml(answer)}]</text>`,
    )
    .join("");
  return (
    `<g class="${nodeClasses(node)}" data-node="${escapeXml(node.id)}">` +
    `<rect x="${node.x}" y="${node.y}" width="${node.width}" height="${node.height}" rx="${4 * node.scale}"/>` +
    `<text class="label" x="${node.x + pad}" y="${node.y + pad + fontSize}" font-size="${fontSize}">${label}</text>` +
    chosen +
    buttons +
    `</g>`
  );
}

function renderEdge(edge: SceneEdge): string {
  const points = edge.points.map(([x, y]) => `${x},${y}`).join(" ");
  const glyph = SYMBOL_GLYPHS[edge.symbol] ?? "";
  const classes = edge.selected ? "edge selected" : "edge";
  return (
    `<g class="${classes}" data-from="${escapeXml(edge.from)}" data-answer="${escapeXml(edge.answer)}">` +
    `<polyline points="${points}" fill="none"/>` +
    `<text class="edge-label" x="${edge.labelX}" y="${edge.labelY}" font-size="10">` +
    `${glyph}${escapeXml(edge.answer)}</text>` +
    `</g>`
  );
}

/** Full-tree SVG. Pan is the container's job; the layout already fits. */
export function renderSvg(scene: Scene | ErrorScene): string {
  if (scene.kind === "error") {
    return (
      `<div class="banner error" role="alert">` +
      `Could not draw the tree: ${escapeXml(scene.message)}</div>`
    );
  }
  const edges = scene.edges.map(renderEdge).join("\n");
  const nodes = scene.nodes.map(renderNode).join("\n");
  // Extra bottom margin keeps answer buttons of the last level visible.
  const margin = 24;
  return (
    `<svg class="tree" role="img" viewBox="0 0 ${scene.width + margin} ${scene.height + margin}" ` +
    `width="${(scene.width + margin) * scene.fit}" height="${(scene.height + margin) * scene.fit}">\n` +
    `${edges}\n${nodes}\n</svg>`
  );
}

/** Recommendation side panel: current paths first, then still-reachable. */
export function renderPanel(scene: Scene | ErrorScene): string {
  if (scene.kind === "error") return "";
  const section = (
    title: string,
    cls: string,
    entries: { id: string; label: string }[],
  ) => {
    const items = entries.length
      ? entries
          .map(
            (e) =>
              `<li data-node="${escapeXml(e.id)}">${escapeXml(e.label)}</li>`,
          )
          .join("")
      : `<li class="empty">none</li>`;
    return `<section class="${cls}"><h3>${escapeXml(title)}</h3><ul>${items}</ul></section>`;
  };
  return (
    section("Current recommendations", "recs-current", scene.panel.current) +
    section(
      "Still accessible",
      "recs-accessible",
      scene.panel.accessible,
    )
  );
}
