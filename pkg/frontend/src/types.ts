export interface MovieInfo {
  movie_id: string;
  n_scenes: number;
  n_sentences: number;
  progress: number;
}

export interface SceneRecord {
  movie_id: string;
  index: number;
  heading: string;
  body: string;
  token_count: number;
}

export type AlignmentSource = "default" | "human";

export interface AlignmentEntry {
  sentence_idx: number;
  scene_ids: number[];
  source: AlignmentSource;
  version: number;
  annotator: string | null;
  updated_at: string | null;
}

export interface AlignmentResponse {
  movie_id: string;
  default_method: string;
  sentences: AlignmentEntry[];
}

export interface SummaryResponse {
  movie_id: string;
  sentences: string[];
}

export interface SaveRequest {
  scene_ids: number[];
  annotator: string;
  expected_version: number;
}

export interface ApiResult<T> {
  status: number;
  body: T | null;
  detail?: string;
}
