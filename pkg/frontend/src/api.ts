/** Typed client for the exercise service. All scoring and hint logic lives
 * server-side; this module only moves JSON. */

export interface ExerciseSummary {
  id: string;
  description: string;
  difficulty: string;
  schema: string;
}

export interface ExerciseDetail extends ExerciseSummary {
  schema_image: string;
  penalty_per_hint: number;
}

export interface ResultMatrix {
  columns: string[];
  rows: unknown[][];
}

export interface ExecuteResponse {
  result: ResultMatrix;
  score: number;
}

export interface DiffOp {
  op: "added" | "removed";
  path: number[];
  token: string;
}

export interface HintPayload {
  sql_text: string;
  diff: DiffOp[];
  matched_state: number;
  matched_distance: number;
  target_state: number;
}

export interface SessionScore {
  raw_score: number;
  hints_used: number;
  penalty_per_hint: number;
  final_score: number;
}

export interface EventRecord {
  user: string;
  exercise_id: string;
  timestamp: string;
  kind: string;
  query_snapshot: string;
}

export class ApiError extends Error {
  constructor(readonly status: number, readonly kind: string, detail: string) {
    super(`${kind}: ${detail}`);
  }
}

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** The surface the UI consumes; tests substitute mocks for it. */
export interface ExerciseApi {
  listExercises(): Promise<ExerciseSummary[]>;
  getExercise(id: string): Promise<ExerciseDetail>;
  execute(id: string, query: string, user: string): Promise<ExecuteResponse>;
  hint(id: string, query: string, user: string): Promise<HintPayload>;
  submit(id: string, query: string, user: string): Promise<SessionScore>;
  postEvents(events: EventRecord[]): Promise<{ accepted: number }>;
}

export class ApiClient implements ExerciseApi {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (...args) => fetch(...args),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const resp = await this.fetchImpl(this.baseUrl + path, init);
    const body = await resp.json();
    if (!resp.ok) {
      throw new ApiError(resp.status, body.error ?? "HttpError", body.detail ?? "");
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  listExercises(): Promise<ExerciseSummary[]> {
    return this.request("/exercises");
  }

  getExercise(id: string): Promise<ExerciseDetail> {
    return this.request(`/exercises/${id}`);
  }

  execute(id: string, query: string, user: string): Promise<ExecuteResponse> {
    return this.post(`/exercises/${id}/execute`, { query, user });
  }

  hint(id: string, query: string, user: string): Promise<HintPayload> {
    return this.post(`/exercises/${id}/hint`, { query, user });
  }

  submit(id: string, query: string, user: string): Promise<SessionScore> {
    return this.post(`/exercises/${id}/submit`, { query, user });
  }

  postEvents(events: EventRecord[]): Promise<{ accepted: number }> {
    return this.post("/events", events);
  }
}
