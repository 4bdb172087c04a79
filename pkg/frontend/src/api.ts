/**
 * Typed client for the composition service HTTP API.
 *
 * The UI never recomputes engine results: every number rendered anywhere
 * comes from one of these response payloads.
 */

export interface KindRef {
  label: string;
  value_type: string;
  unit: string;
}

export interface Question {
  id: string;
  text: string;
  concept: string;
}

export interface TaskInfo {
  id: string;
  name: string;
  required_stream: KindRef[];
  concepts: Record<string, string>;
}

export interface ConstraintEntry {
  question_id: string;
  answer: string;
}

export interface TaskSummary {
  count: number;
  tasks: TaskInfo[];
  constraints: ConstraintEntry[];
}

export interface SolutionNode {
  type: "sensor" | "dpc";
  resource: string;
  signature?: number;
  kind: KindRef;
}

export interface SolutionEdge {
  from: string;
  to: string;
  kind: KindRef;
}

export interface SolutionInfo {
  hash: string;
  task: string;
  expression: string;
  nodes: SolutionNode[];
  edges: SolutionEdge[];
  sinks: { kind: KindRef; node: string }[];
}

export interface MissingSet {
  kinds: KindRef[];
  unlocks: { dpc: string; signature: number }[];
}

export interface RecommendationReport {
  unsatisfiable_kinds: KindRef[];
  missing_sets: MissingSet[];
}

export interface ComposeResponse {
  task: string;
  solutions: SolutionInfo[];
  report: RecommendationReport;
  truncated: boolean;
}

export interface Score {
  solution: string;
  expression: string;
  raw: Record<string, number>;
  normalized: Record<string, number>;
  total: number;
}

export interface ExtraInfo {
  kind: KindRef;
  tier: number;
}

export interface SessionInfo {
  session_id: string;
  kb_version: string;
  task_count: number;
}

export interface KbInfo {
  version_hash: string;
  document: {
    attributes: Record<string, { polarity: string; default: number; aggregate: string }>;
    [key: string]: unknown;
  };
}

/** Error payload every non-2xx response carries. */
export interface ApiErrorBody {
  error: string;
  detail: string;
}

export class ApiError extends Error {
  constructor(
    readonly code: string,
    readonly detail: string,
    readonly status: number,
  ) {
    super(detail);
  }
}

/** One user-facing message per backend error code. */
export const ERROR_MESSAGES: Record<string, string> = {
  unknown_session: "Your session expired. Start over to continue.",
  unknown_question: "That question is not part of this knowledge base.",
  invalid_answer: "That answer is no longer offered. Pick one of the listed answers.",
  unknown_task: "That task is not available. Select a task from the list first.",
  unknown_solution: "That solution is no longer cached. Re-run the composition.",
  invalid_weights: "Weights must be non-negative numbers for registered attributes.",
  underivable_extra: "That context item cannot be derived from the active sensors.",
  kb_validation_failed: "The knowledge base rejected that description.",
  unauthorized: "This server requires an API token.",
};

export function userMessage(err: unknown): string {
  if (err instanceof ApiError) {
    return ERROR_MESSAGES[err.code] ?? err.detail;
  }
  return "The service is unreachable. Check the server and retry.";
}

async function request<T>(method: string, path: string, body?: unknown): Promise<T> {
  const init: RequestInit = { method, headers: {} };
  if (body !== undefined) {
    init.headers = { "Content-Type": "application/json" };
    init.body = JSON.stringify(body);
  }
  const response = await fetch(path, init);
  const payload = await response.json();
  if (!response.ok) {
    const err = payload as ApiErrorBody;
    throw new ApiError(err.error ?? "unknown", err.detail ?? "request failed", response.status);
  }
  return payload as T;
}

export const api = {
  kb: () => request<KbInfo>("GET", "/kb"),
  createSession: () => request<SessionInfo>("POST", "/sessions"),
  questions: (sid: string) =>
    request<{ questions: Question[] }>("GET", `/sessions/${sid}/questions`),
  answersFor: (sid: string, qid: string) =>
    request<{ question_id: string; answers: string[] }>(
      "GET", `/sessions/${sid}/questions/${qid}/answers`),
  applyAnswer: (sid: string, questionId: string, answer: string) =>
    request<TaskSummary>("POST", `/sessions/${sid}/answers`,
      { question_id: questionId, answer }),
  removeAnswer: (sid: string, questionId: string) =>
    request<TaskSummary>("DELETE", `/sessions/${sid}/answers/${questionId}`),
  tasks: (sid: string) => request<TaskSummary>("GET", `/sessions/${sid}/tasks`),
  chooseTask: (sid: string, taskId: string) =>
    request<ComposeResponse>("POST", `/sessions/${sid}/task`, { task_id: taskId }),
  context: (sid: string) =>
    request<{ extras: ExtraInfo[] }>("GET", `/sessions/${sid}/context`),
  weights: (sid: string, weights: Record<string, number>) =>
    request<{ scores: Score[] }>("POST", `/sessions/${sid}/weights`, weights),
  plan: (sid: string, solutionHash: string, extras: string[]) =>
    request<unknown>("POST", `/sessions/${sid}/plan`,
      { solution_hash: solutionHash, extras }),
  addEntity: (type: string, entity: unknown) =>
    request<{ version_hash: string }>("POST", "/kb/entities", { type, entity }),
};
