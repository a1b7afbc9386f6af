import type {
  AlignmentEntry,
  AlignmentResponse,
  ApiResult,
  MovieInfo,
  SaveRequest,
  SceneRecord,
  SummaryResponse,
} from "./types.js";

export type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

/** Thin typed wrapper over the annotation service; never throws on HTTP errors,
 *  only on network failure. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string,
    private readonly fetchFn: FetchLike = (url, init) => fetch(url, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<ApiResult<T>> {
    const response = await this.fetchFn(`${this.baseUrl}${path}`, init);
    let payload: unknown = null;
    try {
      payload = await response.json();
    } catch {
      payload = null;
    }
    if (response.ok) {
      return { status: response.status, body: payload as T };
    }
    const detail =
      payload && typeof payload === "object" && "detail" in payload
        ? String((payload as { detail: unknown }).detail)
        : `HTTP ${response.status}`;
    return { status: response.status, body: null, detail };
  }

  listMovies(): Promise<ApiResult<MovieInfo[]>> {
    return this.request("/movies");
  }

  getAlignment(movieId: string): Promise<ApiResult<AlignmentResponse>> {
    return this.request(`/movies/${encodeURIComponent(movieId)}/alignment`);
  }

  getScenes(movieId: string): Promise<ApiResult<SceneRecord[]>> {
    return this.request(`/movies/${encodeURIComponent(movieId)}/scenes`);
  }

  getSummary(movieId: string): Promise<ApiResult<SummaryResponse>> {
    return this.request(`/movies/${encodeURIComponent(movieId)}/summary`);
  }

  saveSentence(
    movieId: string,
    sentenceIdx: number,
    request: SaveRequest,
  ): Promise<ApiResult<AlignmentEntry>> {
    return this.request(
      `/movies/${encodeURIComponent(movieId)}/alignment/${sentenceIdx}`,
      {
        method: "PUT",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify(request),
      },
    );
  }
}
