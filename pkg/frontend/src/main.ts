/** Browser bootstrap: the only module that touches the DOM or network.
 *
 * Everything it renders comes from buildScene/renderSvg/renderPanel, which
 * are pure; this file owns session state, event wiring, the patient form,
 * and notices. The pending patient record lives in a local variable only —
 * it is never handed to any persistent browser storage, nor to a URL.
 */

import { ApiClient, ApiError } from "./api.js";
import { validateForm } from "./form.js";
import { renderPanel, renderSvg, escapeXml } from "./render.js";
import { buildScene } from "./scene.js";
import type { PatientValue, StatePayload, TreeDoc } from "./types.js";

interface AppState {
  api: ApiClient;
  tree: TreeDoc | null;
  state: StatePayload | null;
}

const app: AppState = {
  api: new ApiClient((url, init) => fetch(url, init)),
  tree: null,
  state: null,
};

function el(id: string): HTMLElement {
  const found = document.getElementById(id);
  if (!found) throw new Error(`missing #${id}`);
  return found;
}

function viewportSpec(): string {
  const stage = el("stage");
  const width = Math.max(320, stage.clientWidth || 1280);
  const height = Math.max(240, stage.clientHeight || 800);
  return `${Math.round(width)}x${Math.round(height)}`;
}

function notify(message: string, kind: "info" | "error" = "info"): void {
  const notices = el("notices");
  const note = document.createElement("div");
  note.className = `notice ${kind}`;
  note.textContent = message;
  notices.appendChild(note);
  setTimeout(() => note.remove(), 6000);
}

function redraw(): void {
  if (!app.tree || !app.state) return;
  const scene = buildScene(app.tree, app.state);
  el("stage").innerHTML = renderSvg(scene);
  el("panel").innerHTML = renderPanel(scene);
  el("status").textContent =
    scene.kind === "scene"
      ? `${app.tree.title} — revision ${scene.revision}` +
        (scene.complete ? " — all paths answered" : "")
      : "payload error";
}

function applyState(state: StatePayload): void {
  app.state = state;
  redraw();
}

async function refresh(): Promise<void> {
  if (!app.state) return;
  applyState(await app.api.getState(app.state.session, viewportSpec()));
}

function surface(err: unknown, retry?: () => void): void {
  if (err instanceof ApiError) {
    notify(err.detail, "error");
    if (err.status === 409) {
      // Someone else advanced this session: re-sync and carry on.
      refresh().catch(() => notify("could not re-sync the session", "error"));
    }
    return;
  }
  notify("network problem — the tree is unchanged", "error");
  if (retry) {
    const notices = el("notices");
    const button = document.createElement("button");
    button.textContent = "Retry";
    button.onclick = () => {
      button.remove();
      retry();
    };
    notices.appendChild(button);
  }
}

function wireStage(): void {
  el("stage").addEventListener("click", (event) => {
    const target = event.target as Element | null;
    if (!target || !app.state) return;
    const session = app.state.session;
    const revision = app.state.revision;
    const button = target.closest(".answer-button");
    if (button) {
      const node = button.getAttribute("data-node") ?? "";
      const answer = button.getAttribute("data-answer") ?? "";
      const kind = app.tree?.nodes.find((n) => n.id === node)?.kind;
      const choices =
        kind === "multi" ? toggleMultiChoice(node, answer) : [answer];
      if (choices === null) return; // multi selection still being built
      const send = () =>
        app.api
          .postAnswer(session, revision, node, choices)
          .then(applyState)
          .catch((err) => surface(err, send));
      send();
      return;
    }
    const nodeEl = target.closest(".node");
    if (nodeEl) {
      const node = nodeEl.getAttribute("data-node") ?? "";
      const send = () =>
        app.api
          .postGoto(session, revision, node)
          .then(applyState)
          .catch((err) => surface(err, send));
      send();
    }
  });
}

/** Multi-choice staging: first clicks toggle; "apply" commits. */
const pendingMulti = new Map<string, Set<string>>();

function toggleMultiChoice(node: string, answer: string): string[] | null {
  if (answer === "✓ apply") {
    const chosen = [...(pendingMulti.get(node) ?? [])];
    pendingMulti.delete(node);
    return chosen.length ? chosen : null;
  }
  const set = pendingMulti.get(node) ?? new Set<string>();
  if (set.has(answer)) set.delete(answer);
  else set.add(answer);
  pendingMulti.set(node, set);
  notify(`selected for ${node}: ${[...set].join(", ") || "none"}`);
  return null;
}

function buildForm(): void {
  const form = el("patient-form") as HTMLFormElement;
  const fields = app.tree?.fields ?? {};
  const rows = Object.entries(fields)
    .map(([name, field]) => {
      const label = escapeXml(field.label ?? name);
      const unit = field.unit ? ` (${escapeXml(field.unit)})` : "";
      if (field.type === "boolean") {
        return (
          `<label>${label}` +
          `<input type="checkbox" name="${escapeXml(name)}" data-kind="boolean"></label>`
        );
      }
      const hint =
        field.type === "enum" ? escapeXml((field.values ?? []).join(" | ")) : "";
      return (
        `<label>${label}${unit}` +
        `<input type="text" name="${escapeXml(name)}" placeholder="${hint}">` +
        `<span class="field-error" data-for="${escapeXml(name)}"></span></label>`
      );
    })
    .join("");
  form.innerHTML =
    rows + `<button type="submit">Apply patient data</button>`;

  form.addEventListener("submit", (event) => {
    event.preventDefault();
    if (!app.state) return;
    // Pending record: read inputs, validate locally, keep in memory only.
    const raw: Record<string, string | boolean> = {};
    for (const input of Array.from(form.elements)) {
      const field = input as HTMLInputElement;
      if (!field.name) continue;
      raw[field.name] =
        field.dataset.kind === "boolean" ? field.checked : field.value;
    }
    const result = validateForm(fields, raw);
    for (const span of form.querySelectorAll(".field-error")) {
      span.textContent = result.errors[span.getAttribute("data-for") ?? ""] ?? "";
    }
    if (Object.keys(result.errors).length) return; // invalid: no network call
    if (!Object.keys(result.values).length) {
      notify("no data to apply");
      return;
    }
    submitPatient(result.values);
  });
}

function submitPatient(values: Record<string, PatientValue>): void {
  if (!app.state) return;
  const { session, revision } = app.state;
  app.api
    .postAutonav(session, revision, values)
    .then(async (out) => {
      for (const step of out.auto.steps) {
        flashNode(step.node);
        await new Promise((resolve) => setTimeout(resolve, 350));
      }
      applyState(out.state);
      const stop = out.auto.stop;
      if (stop.reason === "missing_data") {
        notify(`stopped: missing ${stop.missing_fields?.join(", ")}`);
      } else if (stop.reason === "multi_choice_stop") {
        notify(`stopped at ${stop.node}: select the answers yourself`);
      } else if (out.auto.steps.length === 0) {
        notify("no question could be answered from this data");
      }
    })
    .catch((err) => surface(err));
}

function flashNode(nodeId: string): void {
  const box = document.querySelector(`.node[data-node="${nodeId}"]`);
  box?.classList.add("flash");
  setTimeout(() => box?.classList.remove("flash"), 600);
}

async function boot(): Promise<void> {
  try {
    const catalog = await app.api.listTrees();
    if (!catalog.trees.length) {
      notify("the service has no trees loaded", "error");
      return;
    }
    const treeId = catalog.trees[0].id;
    app.tree = await app.api.getTree(treeId);
    const created = await app.api.createSession(treeId);
    applyState(await app.api.getState(created.session, viewportSpec()));
    buildForm();
    wireStage();
    el("reset").onclick = () => {
      if (!app.state) return;
      app.api
        .postReset(app.state.session, app.state.revision)
        .then(applyState)
        .catch((err) => surface(err));
    };
  } catch (err) {
    surface(err, () => void boot());
  }
}

if (typeof document !== "undefined" && document.getElementById("stage")) {
  void boot();
}
