/** DOM shell: a single-page flow from the exercise list to the exercise
 * view (instructions, schema image, editor, results, hint panel). All
 * behaviour lives in the controller; this file only renders state and
 * forwards clicks. */

import { ApiClient } from "./api.js";
import { ExerciseSession } from "./controller.js";
import { isConfirmation, renderHintDiff } from "./diff.js";
import { EventQueue, trackFocus } from "./telemetry.js";

function el<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing element #${id}`);
  }
  return found as T;
}

function text(value: unknown): string {
  return value === null || value === undefined ? "" : String(value);
}

export function boot(): void {
  const user = `web-${Math.random().toString(36).slice(2, 10)}`;
  const api = new ApiClient("");
  const queue = new EventQueue(api, user);
  const session = new ExerciseSession(api, queue, user);

  const listPane = el<HTMLElement>("exercise-list");
  const viewPane = el<HTMLElement>("exercise-view");
  const title = el<HTMLElement>("exercise-title");
  const description = el<HTMLElement>("exercise-description");
  const penalty = el<HTMLElement>("penalty-notice");
  const schemaImage = el<HTMLImageElement>("schema-image");
  const editor = el<HTMLTextAreaElement>("query-editor");
  const executeBtn = el<HTMLButtonElement>("execute-btn");
  const hintBtn = el<HTMLButtonElement>("hint-btn");
  const useHintBtn = el<HTMLButtonElement>("use-hint-btn");
  const submitBtn = el<HTMLButtonElement>("submit-btn");
  const backBtn = el<HTMLButtonElement>("back-btn");
  const results = el<HTMLElement>("results");
  const hintPanel = el<HTMLElement>("hint-panel");
  const status = el<HTMLElement>("status");

  trackFocus(queue, () => session.state.exerciseId, window);
  window.setInterval(() => void queue.flush().catch(() => undefined), 5000);

  function refreshButtons(): void {
    const busy = session.busy;
    executeBtn.disabled = busy;
    hintBtn.disabled = busy;
    submitBtn.disabled = busy;
    useHintBtn.disabled = busy || !session.canUseHint;
  }

  function renderResults(): void {
    const matrix = session.state.lastResult;
    if (!matrix) {
      results.innerHTML = "";
      return;
    }
    const head = matrix.columns.map((c) => `<th>${c}</th>`).join("");
    const body = matrix.rows
      .map((row) => `<tr>${row.map((v) => `<td>${text(v)}</td>`).join("")}</tr>`)
      .join("");
    const score = session.state.lastScore;
    results.innerHTML =
      `<p>score: <strong>${score === null ? "-" : score.toFixed(1)}</strong></p>` +
      `<table><thead><tr>${head}</tr></thead><tbody>${body}</tbody></table>`;
  }

  function renderHint(): void {
    const hint = session.state.pendingHint;
    if (!hint) {
      hintPanel.innerHTML = "";
      return;
    }
    if (isConfirmation(hint)) {
      hintPanel.innerHTML = `<p class="confirm">Your query matches a known solution.</p>`;
      refreshButtons();
      return;
    }
    const spans = renderHintDiff(hint)
      .map((tok) => `<span class="tok-${tok.style}">${tok.text}</span>`)
      .join(" ");
    hintPanel.innerHTML = `<p>suggested next step:</p><p class="hint-line">${spans}</p>`;
    refreshButtons();
  }

  async function showList(): Promise<void> {
    const exercises = await api.listExercises();
    listPane.innerHTML = exercises
      .map(
        (ex) =>
          `<li><a href="#" data-id="${ex.id}"><strong>${ex.id}</strong>` +
          ` <em>(${ex.difficulty})</em> ${ex.description}</a></li>`,
      )
      .join("");
    listPane.querySelectorAll("a").forEach((a) =>
      a.addEventListener("click", (evt) => {
        evt.preventDefault();
        const id = (evt.currentTarget as HTMLElement).dataset.id;
        if (id) {
          void openExercise(id);
        }
      }),
    );
    listPane.parentElement!.hidden = false;
    viewPane.hidden = true;
  }

  async function openExercise(id: string): Promise<void> {
    const detail = await session.open(id);
    title.textContent = `${detail.id} (${detail.difficulty})`;
    description.textContent = detail.description;
    penalty.textContent = session.penaltyNotice();
    schemaImage.src = detail.schema_image;
    schemaImage.alt = `schema ${detail.schema}`;
    editor.value = "";
    results.innerHTML = "";
    hintPanel.innerHTML = "";
    status.textContent = "";
    listPane.parentElement!.hidden = true;
    viewPane.hidden = false;
    refreshButtons();
  }

  editor.addEventListener("change", () => {
    session.edit(editor.value);
    refreshButtons();
  });

  executeBtn.addEventListener("click", () => {
    session.edit(editor.value);
    void session
      .execute()
      .then(renderResults)
      .catch((err) => {
        status.textContent = String(err);
      })
      .finally(refreshButtons);
    refreshButtons();
  });

  hintBtn.addEventListener("click", () => {
    session.edit(editor.value);
    void session
      .requestHint()
      .then(renderHint)
      .catch((err) => {
        status.textContent = String(err);
      })
      .finally(refreshButtons);
    refreshButtons();
  });

  useHintBtn.addEventListener("click", () => {
    session.useHint();
    editor.value = session.state.queryText;
    hintPanel.innerHTML = "";
    refreshButtons();
  });

  submitBtn.addEventListener("click", () => {
    void session
      .submit()
      .then((score) => {
        status.textContent =
          `raw ${score.raw_score.toFixed(1)}, ${score.hints_used} hints x ` +
          `${score.penalty_per_hint} -> final ${score.final_score.toFixed(1)}`;
      })
      .catch((err) => {
        status.textContent = String(err);
      })
      .finally(refreshButtons);
    refreshButtons();
  });

  backBtn.addEventListener("click", () => void showList());

  void showList();
}

boot();
