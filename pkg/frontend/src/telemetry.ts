/** Client-side event capture: edits, focus changes, hint employment.
 * Timestamps are forced to be strictly increasing so the server can rely
 * on per-session event order. */

import type { ExerciseApi, EventRecord } from "./api.js";

export type Clock = () => Date;

export class EventQueue {
  private pending: EventRecord[] = [];
  private lastStamp = 0;

  constructor(
    private readonly api: Pick<ExerciseApi, "postEvents">,
    private readonly user: string,
    private readonly clock: Clock = () => new Date(),
  ) {}

  private nextTimestamp(): string {
    let millis = this.clock().getTime();
    if (millis <= this.lastStamp) {
      millis = this.lastStamp + 1;
    }
    this.lastStamp = millis;
    return new Date(millis).toISOString();
  }

  push(exerciseId: string, kind: string, querySnapshot = ""): EventRecord {
    const event: EventRecord = {
      user: this.user,
      exercise_id: exerciseId,
      timestamp: this.nextTimestamp(),
      kind,
      query_snapshot: querySnapshot,
    };
    this.pending.push(event);
    return event;
  }

  get pendingCount(): number {
    return this.pending.length;
  }

  async flush(): Promise<number> {
    if (this.pending.length === 0) {
      return 0;
    }
    const batch = this.pending;
    this.pending = [];
    try {
      const ack = await this.api.postEvents(batch);
      return ack.accepted;
    } catch (err) {
      // keep the events for the next flush; telemetry must not lose order
      this.pending = batch.concat(this.pending);
      throw err;
    }
  }
}

/** Wire window focus/blur to focus_lost / focus_gained events. Returns an
 * unsubscribe function. */
export function trackFocus(
  queue: EventQueue,
  exerciseId: () => string | null,
  target: Pick<Window, "addEventListener" | "removeEventListener">,
): () => void {
  const onBlur = () => {
    const id = exerciseId();
    if (id !== null) {
      queue.push(id, "focus_lost");
    }
  };
  const onFocus = () => {
    const id = exerciseId();
    if (id !== null) {
      queue.push(id, "focus_gained");
    }
  };
  target.addEventListener("blur", onBlur);
  target.addEventListener("focus", onFocus);
  return () => {
    target.removeEventListener("blur", onBlur);
    target.removeEventListener("focus", onFocus);
  };
}
