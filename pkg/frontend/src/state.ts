import type { AlignmentEntry, AlignmentSource } from "./types.js";

export interface SentenceState {
  sentenceIdx: number;
  text: string;
  sceneIds: Set<number>;
  /** Last server-acknowledged scene set; dirty means sceneIds differs from it. */
  baseline: Set<number>;
  source: AlignmentSource;
  version: number;
}

function setsEqual(a: Set<number>, b: Set<number>): boolean {
  if (a.size !== b.size) return false;
  for (const x of a) if (!b.has(x)) return false;
  return true;
}

/** Client-side mirror of one movie's alignment plus unsaved local edits.
 *  Scene ids are only ever accepted if the scenes endpoint listed them. */
export class UiAlignmentState {
  readonly movieId: string;
  readonly sentences: SentenceState[];
  readonly knownSceneIds: Set<number>;
  selected: number | null = null;

  constructor(
    movieId: string,
    summarySentences: string[],
    entries: AlignmentEntry[],
    sceneIds: number[],
  ) {
    this.movieId = movieId;
    this.knownSceneIds = new Set(sceneIds);
    const byIdx = new Map(entries.map((e) => [e.sentence_idx, e]));
    this.sentences = summarySentences.map((text, idx) => {
      const entry = byIdx.get(idx);
      const ids = (entry?.scene_ids ?? []).filter((i) => this.knownSceneIds.has(i));
      return {
        sentenceIdx: idx,
        text,
        sceneIds: new Set(ids),
        baseline: new Set(ids),
        source: entry?.source ?? "default",
        version: entry?.version ?? 0,
      };
    });
    if (this.sentences.length > 0) this.selected = 0;
  }

  get selectedSentence(): SentenceState | null {
    return this.selected === null ? null : this.sentences[this.selected];
  }

  select(idx: number): void {
    if (idx >= 0 && idx < this.sentences.length) this.selected = idx;
  }

  selectNext(step: 1 | -1): void {
    if (this.selected === null) return;
    this.select(this.selected + step);
  }

  isDirty(idx: number): boolean {
    const s = this.sentences[idx];
    return !setsEqual(s.sceneIds, s.baseline);
  }

  hasDirty(): boolean {
    return this.sentences.some((_, idx) => this.isDirty(idx));
  }

  /** Toggle a scene in the selected sentence's set; ignores unknown ids. */
  toggleScene(sceneId: number): boolean {
    const sentence = this.selectedSentence;
    if (!sentence || !this.knownSceneIds.has(sceneId)) return false;
    if (sentence.sceneIds.has(sceneId)) {
      sentence.sceneIds.delete(sceneId);
    } else {
      sentence.sceneIds.add(sceneId);
    }
    return true;
  }

  /** Server accepted a save: adopt its record and clear the dirty state. */
  applySaved(idx: number, entry: AlignmentEntry): void {
    const sentence = this.sentences[idx];
    sentence.sceneIds = new Set(entry.scene_ids);
    sentence.baseline = new Set(entry.scene_ids);
    sentence.source = entry.source;
    sentence.version = entry.version;
  }

  /** Refresh from the server after a conflict. With keepLocalEdit the local
   *  scene set survives (still dirty); otherwise the server state wins. */
  adoptServer(idx: number, entry: AlignmentEntry, keepLocalEdit: boolean): void {
    const sentence = this.sentences[idx];
    sentence.baseline = new Set(entry.scene_ids);
    sentence.source = entry.source;
    sentence.version = entry.version;
    if (!keepLocalEdit) {
      sentence.sceneIds = new Set(entry.scene_ids);
    }
  }
}
