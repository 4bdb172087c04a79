/**
 * Application state: a direct mirror of API responses.
 *
 * The UI is a thin client — nothing here recomputes matching, composition,
 * or scores; state fields hold exactly what the service returned and the
 * view renders them verbatim.
 */

import type {
  ComposeResponse,
  ConstraintEntry,
  ExtraInfo,
  Question,
  Score,
  TaskInfo,
} from "./api.js";

export type Step = "wizard" | "solutions" | "describe";

export type EntityType = "sensor" | "dpc" | "task" | "question";

export interface Banner {
  message: string;
  retryLabel: string;
}

export interface UiState {
  sessionId: string | null;
  kbVersion: string;
  step: Step;
  questions: Question[];
  answersByQuestion: Record<string, string[]>;
  constraints: ConstraintEntry[];
  taskCount: number;
  tasks: TaskInfo[];
  selectedTask: string | null;
  compose: ComposeResponse | null;
  attributes: string[];
  sliders: Record<string, number>;
  scores: Score[];
  extras: ExtraInfo[];
  selectedExtras: string[];
  planText: string | null;
  banner: Banner | null;
  describeType: EntityType;
  describeResult: string | null;
}

export const SLIDER_DEFAULT = 5;
export const SLIDER_MAX = 10;

export function initialState(): UiState {
  return {
    sessionId: null,
    kbVersion: "",
    step: "wizard",
    questions: [],
    answersByQuestion: {},
    constraints: [],
    taskCount: 0,
    tasks: [],
    selectedTask: null,
    compose: null,
    attributes: [],
    sliders: {},
    scores: [],
    extras: [],
    selectedExtras: [],
    planText: null,
    banner: null,
    describeType: "sensor",
    describeResult: null,
  };
}

/** Parse the description form's compact field syntax into the entity
 * object the ingestion endpoint takes (see docs/kb-format.md). Kinds are
 * "label" references or inline "label:value_type:unit" declarations. */
export function entityFromForm(type: EntityType, fields: Record<string, string>): unknown {
  const kind = (token: string): unknown => {
    const trimmed = token.trim();
    if (!trimmed.includes(":")) return trimmed;
    const [label, valueType, unit] = trimmed.split(":");
    return { label, value_type: valueType, unit: unit || "none" };
  };
  const kinds = (csv: string): unknown[] =>
    csv.split(",").filter((t) => t.trim()).map(kind);
  const numberMap = (csv: string): Record<string, number> => {
    const out: Record<string, number> = {};
    for (const part of csv.split(",")) {
      if (!part.trim()) continue;
      const [name, value] = part.split("=");
      out[name.trim()] = Number(value);
    }
    return out;
  };
  const base = { id: fields.id?.trim() ?? "", name: fields.name?.trim() ?? "" };
  if (type === "sensor") {
    return {
      ...base,
      outputs: kinds(fields.outputs ?? ""),
      active: fields.active !== "false",
      context: numberMap(fields.context ?? ""),
      domains: (fields.domains ?? "").split(",").map((d) => d.trim()).filter(Boolean),
    };
  }
  if (type === "dpc") {
    const signatures = (fields.signatures ?? "")
      .split("\n")
      .map((line) => line.trim())
      .filter(Boolean)
      .map((line) => {
        const [inputs, output] = line.split("->");
        return { inputs: kinds(inputs ?? ""), output: kind(output ?? "") };
      });
    return { ...base, signatures, context: numberMap(fields.context ?? "") };
  }
  if (type === "task") {
    const concepts: Record<string, string> = {};
    for (const part of (fields.concepts ?? "").split(",")) {
      if (!part.trim()) continue;
      const [concept, value] = part.split("=");
      concepts[concept.trim()] = (value ?? "").trim();
    }
    return { ...base, required_stream: kinds(fields.required_stream ?? ""), concepts };
  }
  return { id: base.id, text: fields.text?.trim() ?? "", concept: fields.concept?.trim() ?? "" };
}

/** Equal priorities, the documented default. */
export function defaultSliders(attributes: string[]): Record<string, number> {
  const sliders: Record<string, number> = {};
  for (const name of attributes) sliders[name] = SLIDER_DEFAULT;
  return sliders;
}

/** Raw integer slider map sent to /weights; normalization is server-side. */
export function sliderWeights(sliders: Record<string, number>): Record<string, number> {
  const weights: Record<string, number> = {};
  for (const [name, value] of Object.entries(sliders)) {
    weights[name] = value;
  }
  return weights;
}

export function toggleExtra(selected: string[], label: string): string[] {
  return selected.includes(label)
    ? selected.filter((l) => l !== label)
    : [...selected, label].sort();
}

/** Solutions in the order of the latest score response (thin-client rule:
 * the card order IS the /weights response order). */
export function orderedSolutionHashes(state: UiState): string[] {
  if (state.scores.length > 0) {
    return state.scores.map((s) => s.solution);
  }
  return (state.compose?.solutions ?? []).map((s) => s.hash);
}
