/** Editor state and its transitions. Pure data in, data out: the DOM layer
 * renders whatever this module says, and every score or hint shown to the
 * student originated from a server response. */

import type { HintPayload, ResultMatrix } from "./api.js";

export interface EditorState {
  exerciseId: string | null;
  queryText: string;
  lastResult: ResultMatrix | null;
  lastScore: number | null;
  pendingHint: HintPayload | null;
  /** editor content at the moment the pending hint was generated */
  hintGeneratedFor: string | null;
  hintCount: number;
}

export function initialState(): EditorState {
  return {
    exerciseId: null,
    queryText: "",
    lastResult: null,
    lastScore: null,
    pendingHint: null,
    hintGeneratedFor: null,
    hintCount: 0,
  };
}

export function openExercise(state: EditorState, exerciseId: string): EditorState {
  return { ...initialState(), exerciseId };
}

export function setQuery(state: EditorState, text: string): EditorState {
  return { ...state, queryText: text };
}

export function recordResult(
  state: EditorState,
  result: ResultMatrix,
  score: number,
): EditorState {
  return { ...state, lastResult: result, lastScore: score };
}

export function receiveHint(state: EditorState, hint: HintPayload): EditorState {
  return { ...state, pendingHint: hint, hintGeneratedFor: state.queryText };
}

/** "Use hint" stays disabled unless the pending hint was generated against
 * the editor's current content. */
export function canUseHint(state: EditorState): boolean {
  return state.pendingHint !== null && state.hintGeneratedFor === state.queryText;
}

export function useHint(state: EditorState): EditorState {
  if (!canUseHint(state) || state.pendingHint === null) {
    return state;
  }
  return {
    ...state,
    queryText: state.pendingHint.sql_text,
    pendingHint: null,
    hintGeneratedFor: null,
    hintCount: state.hintCount + 1,
  };
}
