import type {
  CompileResponse,
  Diagnostics,
  GraphDoc,
  JogResponse,
  SimulateResponse,
} from './types.js';

export class ApiError extends Error {
  constructor(readonly status: number, message: string) {
    super(message);
  }
}

type FetchLike = typeof fetch;

/** Thin typed client for the /v1 API. All numbers shown in the UI come from
 * these responses. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = fetch,
  ) {}

  private async request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, {
      method,
      headers: { 'Content-Type': 'application/json' },
      body: body === undefined ? undefined : JSON.stringify(body),
    });
    const payload = await response.json().catch(() => ({}));
    if (!response.ok) {
      const detail =
        typeof payload === 'object' && payload !== null && 'detail' in payload
          ? JSON.stringify((payload as { detail: unknown }).detail)
          : response.statusText;
      throw new ApiError(response.status, detail);
    }
    return payload as T;
  }

  validate(graph: GraphDoc): Promise<Diagnostics> {
    return this.request('POST', '/v1/validate', { graph });
  }

  compile(graph: GraphDoc, correct = true): Promise<CompileResponse> {
    return this.request('POST', '/v1/compile', { graph, correct });
  }

  simulate(text: string): Promise<SimulateResponse> {
    return this.request('POST', '/v1/simulate', { text });
  }

  jog(kind: 'F' | 'B' | 'R', magnitude: number): Promise<JogResponse> {
    return this.request('POST', '/v1/machine/jog', { kind, magnitude });
  }

  getProfile(): Promise<Record<string, unknown>> {
    return this.request('GET', '/v1/profile');
  }

  putProfile(profile: Record<string, unknown>): Promise<Record<string, unknown>> {
    return this.request('PUT', '/v1/profile', profile);
  }
}
