/** Wire types for the decision-tree service API (format_version 1). */

export type NodeKind = "single" | "multi" | "recommendation";

export interface TreeNodeDoc {
  id: string;
  kind: NodeKind;
  label: string;
  detail?: string;
  predicate?: unknown;
}

export interface TreeEdgeDoc {
  from: string;
  answer: string;
  to: string;
  symbol?: string;
}

export type FieldType = "number" | "boolean" | "string" | "enum";

export interface FieldDoc {
  type: FieldType;
  label?: string;
  unit?: string;
  values?: string[];
}

export interface TreeDoc {
  format_version: number;
  id: string;
  title: string;
  root: string;
  nodes: TreeNodeDoc[];
  edges: TreeEdgeDoc[];
  fields?: Record<string, FieldDoc>;
}

export interface LayoutNode {
  x: number;
  y: number;
  width: number;
  height: number;
  scale: number;
  distance: number;
  grayed: boolean;
}

export interface LayoutEdge {
  from: string;
  answer: string;
  to: string;
  symbol: string;
  points: [number, number][];
}

export interface LayoutDoc {
  width: number;
  height: number;
  fit: number;
  nodes: Record<string, LayoutNode>;
  edges: LayoutEdge[];
}

export interface SelectedEdge {
  from: string;
  answer: string;
  to: string;
}

export interface ActionDoc {
  kind: string;
  node?: string;
  choices?: string[];
}

export interface StatePayload {
  session: string;
  tree: string;
  revision: number;
  complete: boolean;
  frontier: string[];
  open_questions: string[];
  selected: SelectedEdge[];
  answered: Record<string, string[]>;
  grayed: string[];
  recommendations: { current: string[]; accessible: string[] };
  layout: LayoutDoc;
  history: ActionDoc[];
}

/** A patient value as the wire accepts it. */
export type PatientValue =
  | boolean
  | string
  | number
  | { value: number; unit?: string };

export interface PatientDoc {
  format_version: number;
  values: Record<string, PatientValue>;
}
