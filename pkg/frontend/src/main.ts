/**
 * Application wiring: state transitions are API calls, every response
 * replaces the corresponding state slice, then the view re-renders.
 * Slider moves are latest-wins: a stale /weights response never
 * overwrites a newer one.
 */

import { api, userMessage } from "./api.js";
import {
  UiState,
  defaultSliders,
  entityFromForm,
  initialState,
  sliderWeights,
  toggleExtra,
} from "./state.js";
import { Handlers, render } from "./view.js";

export class App {
  state: UiState = initialState();
  /** Resolves when the most recent user action finished (for tests). */
  pending: Promise<void> = Promise.resolve();
  private weightsEpoch = 0;
  private lastAction: (() => Promise<void>) | null = null;

  constructor(private root: HTMLElement) {}

  private draw(): void {
    render(this.root, this.state, this.handlers);
  }

  /** Run an API-backed action; failures surface as a retryable banner. */
  private act(action: () => Promise<void>): Promise<void> {
    this.lastAction = action;
    const run = async () => {
      try {
        await action();
        this.state.banner = null;
      } catch (err) {
        this.state.banner = { message: userMessage(err), retryLabel: "retry" };
      }
      this.draw();
    };
    this.pending = this.pending.then(run, run);
    return this.pending;
  }

  async start(): Promise<void> {
    await this.act(async () => {
      const kb = await api.kb();
      this.state.attributes = Object.keys(kb.document.attributes).sort();
      this.state.sliders = defaultSliders(this.state.attributes);
      const session = await api.createSession();
      this.state.sessionId = session.session_id;
      this.state.kbVersion = session.kb_version;
      await this.refreshWizard();
    });
  }

  private sid(): string {
    if (!this.state.sessionId) throw new Error("no session");
    return this.state.sessionId;
  }

  private async refreshWizard(): Promise<void> {
    const summary = await api.tasks(this.sid());
    this.state.taskCount = summary.count;
    this.state.tasks = summary.tasks;
    this.state.constraints = summary.constraints;
    const { questions } = await api.questions(this.sid());
    this.state.questions = questions;
    this.state.answersByQuestion = {};
    for (const question of questions) {
      const { answers } = await api.answersFor(this.sid(), question.id);
      this.state.answersByQuestion[question.id] = answers;
    }
  }

  readonly handlers: Handlers = {
    pickAnswer: (questionId, answer) => {
      void this.act(async () => {
        const summary = await api.applyAnswer(this.sid(), questionId, answer);
        this.state.taskCount = summary.count;
        this.state.tasks = summary.tasks;
        this.state.constraints = summary.constraints;
        await this.refreshWizard();
      });
    },
    undoAnswer: (questionId) => {
      void this.act(async () => {
        await api.removeAnswer(this.sid(), questionId);
        await this.refreshWizard();
      });
    },
    pickTask: (taskId) => {
      void this.act(async () => {
        const compose = await api.chooseTask(this.sid(), taskId);
        this.state.selectedTask = taskId;
        this.state.compose = compose;
        this.state.step = "solutions";
        this.state.scores = [];
        this.state.extras = [];
        this.state.selectedExtras = [];
        this.state.planText = null;
        if (compose.solutions.length > 0) {
          const { scores } = await api.weights(this.sid(),
            sliderWeights(this.state.sliders));
          this.state.scores = scores;
          const { extras } = await api.context(this.sid());
          this.state.extras = extras;
        }
      });
    },
    backToWizard: () => {
      void this.act(async () => {
        this.state.step = "wizard";
        this.state.compose = null;
        this.state.scores = [];
        await this.refreshWizard();
      });
    },
    moveSlider: (attribute, value) => {
      this.state.sliders = { ...this.state.sliders, [attribute]: value };
      const epoch = ++this.weightsEpoch;
      void this.act(async () => {
        const { scores } = await api.weights(this.sid(),
          sliderWeights(this.state.sliders));
        if (epoch === this.weightsEpoch) {
          this.state.scores = scores;
        }
      });
    },
    toggleExtra: (label) => {
      this.state.selectedExtras = toggleExtra(this.state.selectedExtras, label);
      this.draw();
    },
    downloadPlan: (solutionHash) => {
      void this.act(async () => {
        const plan = await api.plan(this.sid(), solutionHash, this.state.selectedExtras);
        this.state.planText = JSON.stringify(plan, null, 2) + "\n";
        this.deliverDownload(this.state.planText);
      });
    },
    openDescribe: () => {
      this.state.step = "describe";
      this.state.describeResult = null;
      this.draw();
    },
    setDescribeType: (type) => {
      this.state.describeType = type;
      this.state.describeResult = null;
      this.draw();
    },
    submitDescription: (fields) => {
      void this.act(async () => {
        const entity = entityFromForm(this.state.describeType, fields);
        const { version_hash } = await api.addEntity(this.state.describeType, entity);
        this.state.describeResult =
          `Added. Knowledge base is now version ${version_hash}; ` +
          `new sessions will see it.`;
      });
    },
    retryBanner: () => {
      const action = this.lastAction;
      if (action) void this.act(action);
    },
    dismissBanner: () => {
      this.state.banner = null;
      this.draw();
    },
  };

  /** Hand the plan text to the browser as a file download. */
  deliverDownload(text: string): void {
    const blob = new Blob([text], { type: "application/json" });
    const url = URL.createObjectURL(blob);
    const anchor = document.createElement("a");
    anchor.href = url;
    anchor.download = "deployment-plan.json";
    anchor.click();
    URL.revokeObjectURL(url);
  }
}

export function mount(root: HTMLElement): App {
  const app = new App(root);
  void app.start();
  return app;
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  mount(document.getElementById("app")!);
}
