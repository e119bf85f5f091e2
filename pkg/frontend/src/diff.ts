/** Turn a server hint payload into a styled token stream for the hint
 * panel: tokens the hint adds over the student's query render green, tokens
 * the hint drops render red with strikethrough. The ops come verbatim from
 * the server; this module only decides presentation. */

import type { HintPayload } from "./api.js";

export interface StyledToken {
  text: string;
  style: "added" | "removed" | "plain";
}

/** Split a rendered SQL line the same way the service emits tokens. */
export function tokenizeSql(text: string): string[] {
  const pattern = /<=|>=|<>|[(),.*=<>]|'[^']*'|[A-Za-z_][A-Za-z0-9_$.]*|\d+(?:\.\d+)?/g;
  return text.match(pattern) ?? [];
}

export function renderHintDiff(hint: HintPayload): StyledToken[] {
  const added = hint.diff.filter((d) => d.op === "added").map((d) => d.token);
  const removed = hint.diff.filter((d) => d.op === "removed").map((d) => d.token);
  const tokens = tokenizeSql(hint.sql_text);
  // align added ops to token positions right-to-left: hints mostly extend
  // the tail of the query, so duplicated token texts (commas, parens)
  // resolve to the latest occurrence
  const styles: ("added" | "plain")[] = tokens.map(() => "plain");
  let next = added.length - 1;
  for (let i = tokens.length - 1; i >= 0 && next >= 0; i -= 1) {
    if (tokens[i] === added[next]) {
      styles[i] = "added";
      next -= 1;
    }
  }
  const out: StyledToken[] = tokens.map((text, i) => ({ text, style: styles[i] }));
  for (const token of removed) {
    out.push({ text: token, style: "removed" });
  }
  return out;
}

/** True when the panel has nothing to highlight (a confirmation hint). */
export function isConfirmation(hint: HintPayload): boolean {
  return hint.diff.length === 0;
}
