/**
 * DOM rendering. Pure functions from state to elements; all interaction
 * is delegated through the handler bundle so tests can drive the UI.
 */

import type { Score, SolutionInfo } from "./api.js";
import { dagSvg, layoutSolution } from "./dag.js";
import { EntityType, SLIDER_MAX, UiState, orderedSolutionHashes } from "./state.js";

export interface Handlers {
  pickAnswer(questionId: string, answer: string): void;
  undoAnswer(questionId: string): void;
  pickTask(taskId: string): void;
  backToWizard(): void;
  moveSlider(attribute: string, value: number): void;
  toggleExtra(label: string): void;
  downloadPlan(solutionHash: string): void;
  openDescribe(): void;
  setDescribeType(type: EntityType): void;
  submitDescription(fields: Record<string, string>): void;
  retryBanner(): void;
  dismissBanner(): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K, className?: string, text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  if (className) node.className = className;
  if (text !== undefined) node.textContent = text;
  return node;
}

export function render(root: HTMLElement, state: UiState, handlers: Handlers): void {
  root.textContent = "";
  if (state.banner) {
    root.appendChild(renderBanner(state, handlers));
  }
  const header = el("header");
  header.appendChild(el("h1", "", "streamweave"));
  header.appendChild(el("span", "kb-version", state.kbVersion && `KB ${state.kbVersion}`));
  const describe = el("button", "open-describe", "describe a resource");
  describe.onclick = () => handlers.openDescribe();
  header.appendChild(describe);
  root.appendChild(header);

  if (state.step === "wizard") {
    root.appendChild(renderWizard(state, handlers));
  } else if (state.step === "solutions") {
    root.appendChild(renderSolutions(state, handlers));
  } else {
    root.appendChild(renderDescribe(state, handlers));
  }
}

function renderBanner(state: UiState, handlers: Handlers): HTMLElement {
  const banner = el("div", "banner");
  banner.appendChild(el("span", "banner-message", state.banner!.message));
  const retry = el("button", "banner-retry", state.banner!.retryLabel);
  retry.onclick = () => handlers.retryBanner();
  banner.appendChild(retry);
  const dismiss = el("button", "banner-dismiss", "dismiss");
  dismiss.onclick = () => handlers.dismissBanner();
  banner.appendChild(dismiss);
  return banner;
}

function renderWizard(state: UiState, handlers: Handlers): HTMLElement {
  const panel = el("section", "wizard");

  const count = el("p", "task-count");
  count.textContent = `${state.taskCount} matching task${state.taskCount === 1 ? "" : "s"}`;
  panel.appendChild(count);

  if (state.constraints.length) {
    const answered = el("ul", "answered");
    for (const entry of state.constraints) {
      const item = el("li", "answered-item");
      item.appendChild(el("span", "", `${entry.question_id} = ${entry.answer}`));
      const undo = el("button", "undo", "undo");
      undo.onclick = () => handlers.undoAnswer(entry.question_id);
      item.appendChild(undo);
      answered.appendChild(item);
    }
    panel.appendChild(answered);
  }

  for (const question of state.questions) {
    const block = el("div", "question");
    block.appendChild(el("p", "question-text", question.text));
    const answers = el("div", "answers");
    for (const answer of state.answersByQuestion[question.id] ?? []) {
      const button = el("button", "answer", answer);
      button.onclick = () => handlers.pickAnswer(question.id, answer);
      answers.appendChild(button);
    }
    block.appendChild(answers);
    panel.appendChild(block);
  }

  const tasks = el("div", "tasks");
  for (const task of state.tasks) {
    const card = el("div", "task-card");
    card.appendChild(el("h3", "", task.name || task.id));
    card.appendChild(el("p", "task-stream",
      task.required_stream.map((k) => k.label).join(", ")));
    const pick = el("button", "pick-task", "Search solutions");
    pick.onclick = () => handlers.pickTask(task.id);
    card.appendChild(pick);
    tasks.appendChild(card);
  }
  panel.appendChild(tasks);
  return panel;
}

function renderSolutions(state: UiState, handlers: Handlers): HTMLElement {
  const panel = el("section", "solutions");
  const back = el("button", "back", "back to questions");
  back.onclick = () => handlers.backToWizard();
  panel.appendChild(back);

  const compose = state.compose;
  if (!compose) return panel;

  if (compose.solutions.length === 0) {
    panel.appendChild(renderRecommendations(compose));
    return panel;
  }

  panel.appendChild(renderSliders(state, handlers));

  const byHash = new Map(compose.solutions.map((s) => [s.hash, s]));
  const scoreByHash = new Map(state.scores.map((s) => [s.solution, s]));
  const list = el("div", "solution-list");
  for (const hash of orderedSolutionHashes(state)) {
    const solution = byHash.get(hash);
    if (solution) {
      list.appendChild(renderSolutionCard(solution, scoreByHash.get(hash), handlers));
    }
  }
  panel.appendChild(list);
  panel.appendChild(renderExtras(state, handlers));
  if (compose.truncated) {
    panel.appendChild(el("p", "truncated", "Result truncated by search limits."));
  }
  return panel;
}

function renderRecommendations(compose: { report: { unsatisfiable_kinds: { label: string }[]; missing_sets: { kinds: { label: string }[]; unlocks: { dpc: string; signature: number }[] }[] } }): HTMLElement {
  const block = el("div", "recommendations");
  block.appendChild(el("h2", "", "No solution with the current sensors"));
  const unsat = compose.report.unsatisfiable_kinds.map((k) => k.label).join(", ");
  block.appendChild(el("p", "unsatisfiable", `Cannot produce: ${unsat}`));
  block.appendChild(el("p", "", "Deploy one of:"));
  const chips = el("div", "chips");
  for (const missing of compose.report.missing_sets) {
    const chip = el("span", "chip",
      missing.kinds.map((k) => k.label).join(" + "));
    chip.title = missing.unlocks.map((u) => `${u.dpc}[${u.signature}]`).join(", ");
    chips.appendChild(chip);
  }
  block.appendChild(chips);
  return block;
}

function renderSliders(state: UiState, handlers: Handlers): HTMLElement {
  const block = el("div", "weights");
  block.appendChild(el("h2", "", "Priorities"));
  for (const attribute of state.attributes) {
    const row = el("label", "weight-row");
    row.appendChild(el("span", "weight-name", attribute));
    const slider = el("input", "weight-slider") as HTMLInputElement;
    slider.type = "range";
    slider.min = "0";
    slider.max = String(SLIDER_MAX);
    slider.step = "1";
    slider.value = String(state.sliders[attribute] ?? 0);
    slider.dataset.attribute = attribute;
    slider.oninput = () => handlers.moveSlider(attribute, Number(slider.value));
    row.appendChild(slider);
    row.appendChild(el("span", "weight-value", String(state.sliders[attribute] ?? 0)));
    block.appendChild(row);
  }
  return block;
}

function renderSolutionCard(
  solution: SolutionInfo, score: Score | undefined, handlers: Handlers,
): HTMLElement {
  const card = el("div", "solution-card");
  card.dataset.hash = solution.hash;
  card.appendChild(el("h3", "solution-expression", solution.expression));
  if (score) {
    card.appendChild(el("p", "solution-total", `score ${score.total.toFixed(3)}`));
    const raw = el("p", "solution-raw");
    raw.textContent = Object.entries(score.raw)
      .map(([name, value]) => `${name} ${Number(value.toFixed(3))}`)
      .join(" · ");
    card.appendChild(raw);
  }
  const holder = el("div", "dag-holder");
  holder.innerHTML = dagSvg(layoutSolution(solution));
  card.appendChild(holder);
  const download = el("button", "download-plan", "Export deployment plan");
  download.onclick = () => handlers.downloadPlan(solution.hash);
  card.appendChild(download);
  return card;
}

const DESCRIBE_FIELDS: Record<EntityType, { name: string; label: string; area?: boolean }[]> = {
  sensor: [
    { name: "id", label: "id" },
    { name: "name", label: "name" },
    { name: "outputs", label: "outputs (label or label:type:unit, comma separated)" },
    { name: "context", label: "context (name=value, comma separated)" },
    { name: "domains", label: "domains (comma separated)" },
  ],
  dpc: [
    { name: "id", label: "id" },
    { name: "name", label: "name" },
    { name: "signatures", label: "signatures (one per line: in1, in2 -> out)", area: true },
    { name: "context", label: "context (name=value, comma separated)" },
  ],
  task: [
    { name: "id", label: "id" },
    { name: "name", label: "name" },
    { name: "required_stream", label: "required stream kinds (comma separated)" },
    { name: "concepts", label: "concepts (concept=value, comma separated)" },
  ],
  question: [
    { name: "id", label: "id" },
    { name: "text", label: "question text" },
    { name: "concept", label: "concept" },
  ],
};

function renderDescribe(state: UiState, handlers: Handlers): HTMLElement {
  const panel = el("section", "describe");
  const back = el("button", "back", "back to questions");
  back.onclick = () => handlers.backToWizard();
  panel.appendChild(back);
  panel.appendChild(el("h2", "", "Describe a new resource"));
  panel.appendChild(el("p", "describe-hint",
    "Fill the form; the description is validated and added to the knowledge base. " +
    "New sessions immediately see it."));

  const picker = el("div", "describe-types");
  for (const type of ["sensor", "dpc", "task", "question"] as EntityType[]) {
    const button = el("button",
      state.describeType === type ? "describe-type active" : "describe-type", type);
    button.onclick = () => handlers.setDescribeType(type);
    picker.appendChild(button);
  }
  panel.appendChild(picker);

  const form = el("div", "describe-form");
  for (const field of DESCRIBE_FIELDS[state.describeType]) {
    const row = el("label", "describe-row");
    row.appendChild(el("span", "describe-label", field.label));
    const input = el(field.area ? "textarea" : "input", "describe-input");
    input.setAttribute("name", field.name);
    row.appendChild(input);
    form.appendChild(row);
  }
  panel.appendChild(form);

  const submit = el("button", "describe-submit", "Add to knowledge base");
  submit.onclick = () => {
    const fields: Record<string, string> = {};
    form.querySelectorAll<HTMLInputElement | HTMLTextAreaElement>("[name]")
      .forEach((input) => { fields[input.getAttribute("name")!] = input.value; });
    handlers.submitDescription(fields);
  };
  panel.appendChild(submit);

  if (state.describeResult) {
    panel.appendChild(el("p", "describe-result", state.describeResult));
  }
  return panel;
}

function renderExtras(state: UiState, handlers: Handlers): HTMLElement {
  const block = el("div", "extras");
  block.appendChild(el("h2", "", "Extra context to include"));
  const list = el("div", "extras-list");
  for (const extra of state.extras) {
    const row = el("label", "extra-row");
    const box = el("input") as HTMLInputElement;
    box.type = "checkbox";
    box.value = extra.kind.label;
    box.checked = state.selectedExtras.includes(extra.kind.label);
    box.onchange = () => handlers.toggleExtra(extra.kind.label);
    row.appendChild(box);
    row.appendChild(el("span", "", `${extra.kind.label} (tier ${extra.tier})`));
    list.appendChild(row);
  }
  block.appendChild(list);
  return block;
}
