import type { FetchLike } from "../src/api.js";
import type { AlignmentEntry, SceneRecord } from "../src/types.js";

interface StoredRecord {
  scene_ids: number[];
  annotator: string;
  version: number;
  updated_at: string;
}

interface MovieData {
  scenes: SceneRecord[];
  sentences: string[];
  defaults: number[][];
}

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

/** In-memory stand-in for the annotation service with the same semantics:
 *  per-sentence optimistic versioning, default-vs-human sources, 404/409/422. */
export class FakeService {
  private movies = new Map<string, MovieData>();
  private records = new Map<string, Map<number, StoredRecord>>();
  failNetwork = false;
  forcePutStatus: number | null = null;

  addMovie(
    movieId: string,
    scenes: Array<{ heading: string; body: string }>,
    sentences: string[],
    defaults: number[][],
  ): void {
    this.movies.set(movieId, {
      scenes: scenes.map((s, index) => ({
        movie_id: movieId,
        index,
        heading: s.heading,
        body: s.body,
        token_count: s.body.split(/\s+/).filter(Boolean).length,
      })),
      sentences,
      defaults,
    });
    this.records.set(movieId, new Map());
  }

  private entry(movieId: string, idx: number): AlignmentEntry {
    const movie = this.movies.get(movieId)!;
    const record = this.records.get(movieId)!.get(idx);
    if (record) {
      return {
        sentence_idx: idx,
        scene_ids: [...record.scene_ids].sort((a, b) => a - b),
        source: "human",
        version: record.version,
        annotator: record.annotator,
        updated_at: record.updated_at,
      };
    }
    return {
      sentence_idx: idx,
      scene_ids: movie.defaults[idx] ?? [],
      source: "default",
      version: 0,
      annotator: null,
      updated_at: null,
    };
  }

  fetch: FetchLike = async (url, init) => {
    if (this.failNetwork) throw new TypeError("fetch failed");
    const { pathname } = new URL(url, "http://fake");
    const parts = pathname.split("/").filter(Boolean);

    if (parts.length === 1 && parts[0] === "movies") {
      return json(
        [...this.movies.entries()].map(([movie_id, data]) => ({
          movie_id,
          n_scenes: data.scenes.length,
          n_sentences: data.sentences.length,
          progress:
            data.sentences.length === 0
              ? 0
              : this.records.get(movie_id)!.size / data.sentences.length,
        })),
      );
    }

    const movieId = decodeURIComponent(parts[1] ?? "");
    const movie = this.movies.get(movieId);
    if (!movie) return json({ detail: `unknown movie '${movieId}'` }, 404);

    if (parts[2] === "scenes") return json(movie.scenes);
    if (parts[2] === "summary") return json({ movie_id: movieId, sentences: movie.sentences });

    if (parts[2] === "alignment" && parts.length === 3) {
      return json({
        movie_id: movieId,
        default_method: "fake",
        sentences: movie.sentences.map((_, idx) => this.entry(movieId, idx)),
      });
    }

    if (parts[2] === "alignment" && init?.method === "PUT") {
      if (this.forcePutStatus !== null) {
        return json({ detail: `forced ${this.forcePutStatus}` }, this.forcePutStatus);
      }
      const idx = Number.parseInt(parts[3], 10);
      if (!(idx >= 0 && idx < movie.sentences.length)) {
        return json({ detail: `no sentence ${idx}` }, 404);
      }
      const body = JSON.parse(String(init.body)) as {
        scene_ids: number[];
        annotator: string;
        expected_version: number;
      };
      const bad = body.scene_ids.filter((i) => i < 0 || i >= movie.scenes.length);
      if (bad.length > 0) {
        return json({ detail: `scene ids out of range: ${bad}` }, 422);
      }
      const current = this.records.get(movieId)!.get(idx);
      const currentVersion = current?.version ?? 0;
      if (body.expected_version !== currentVersion) {
        return json(
          { detail: `version conflict: stored ${currentVersion}` },
          409,
        );
      }
      this.records.get(movieId)!.set(idx, {
        scene_ids: [...new Set(body.scene_ids)].sort((a, b) => a - b),
        annotator: body.annotator,
        version: currentVersion + 1,
        updated_at: "2020-01-01T00:00:00+00:00",
      });
      return json({ movie_id: movieId, ...this.entry(movieId, idx) });
    }

    return json({ detail: "not found" }, 404);
  };
}
