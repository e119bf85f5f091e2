/** Headless session controller: glues the API client, editor state and the
 * telemetry queue together so the DOM layer stays a thin renderer (and the
 * whole flow is testable without a browser). At most one server call runs
 * at a time; buttons should follow `busy`. */

import type { ExerciseApi, ExerciseDetail, HintPayload, SessionScore } from "./api.js";
import type { EventQueue } from "./telemetry.js";
import * as state from "./state.js";

export class ExerciseSession {
  state: state.EditorState = state.initialState();
  detail: ExerciseDetail | null = null;
  busy = false;

  constructor(
    private readonly api: ExerciseApi,
    private readonly events: EventQueue,
    private readonly user: string,
  ) {}

  private async exclusive<T>(work: () => Promise<T>): Promise<T> {
    if (this.busy) {
      throw new Error("a request is already in flight");
    }
    this.busy = true;
    try {
      return await work();
    } finally {
      this.busy = false;
    }
  }

  async open(exerciseId: string): Promise<ExerciseDetail> {
    return this.exclusive(async () => {
      this.detail = await this.api.getExercise(exerciseId);
      this.state = state.openExercise(this.state, exerciseId);
      return this.detail;
    });
  }

  /** The penalty disclosure shown before the student starts typing. */
  penaltyNotice(): string {
    if (this.detail === null) {
      return "";
    }
    return (
      `Each employed hint deducts ${this.detail.penalty_per_hint} points ` +
      `(${this.detail.difficulty} exercise). Hints are unlimited.`
    );
  }

  edit(text: string): void {
    this.state = state.setQuery(this.state, text);
    if (this.state.exerciseId !== null) {
      this.events.push(this.state.exerciseId, "edit", text);
    }
  }

  async execute(): Promise<void> {
    const id = this.requireExercise();
    await this.exclusive(async () => {
      const resp = await this.api.execute(id, this.state.queryText, this.user);
      this.state = state.recordResult(this.state, resp.result, resp.score);
    });
  }

  async requestHint(): Promise<HintPayload> {
    const id = this.requireExercise();
    return this.exclusive(async () => {
      const hint = await this.api.hint(id, this.state.queryText, this.user);
      this.state = state.receiveHint(this.state, hint);
      return hint;
    });
  }

  get canUseHint(): boolean {
    return state.canUseHint(this.state);
  }

  /** Adopt the pending hint: replaces the editor content and posts exactly
   * one hint_employed event carrying the adopted query. */
  useHint(): void {
    if (!this.canUseHint) {
      return;
    }
    const id = this.requireExercise();
    this.state = state.useHint(this.state);
    this.events.push(id, "hint_employed", this.state.queryText);
  }

  async submit(): Promise<SessionScore> {
    const id = this.requireExercise();
    return this.exclusive(async () => {
      await this.flushQuietly();
      return this.api.submit(id, this.state.queryText, this.user);
    });
  }

  private async flushQuietly(): Promise<void> {
    try {
      await this.events.flush();
    } catch {
      // submission proceeds; unflushed telemetry stays queued
    }
  }

  private requireExercise(): string {
    if (this.state.exerciseId === null) {
      throw new Error("no exercise open");
    }
    return this.state.exerciseId;
  }
}
