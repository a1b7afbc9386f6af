import type { ApiClient } from "./api.js";
import { UiAlignmentState } from "./state.js";
import type { AlignmentEntry, SceneRecord } from "./types.js";

const PREVIEW_TOKENS = 40;

interface ConflictContext {
  sentenceIdx: number;
  detail: string;
}

/** Two-pane alignment editor: summary sentences left, numbered scenes right.
 *  All server interaction goes through the injected ApiClient so the whole
 *  app can run against a faked service in tests. */
export class App {
  private state!: UiAlignmentState;
  private scenes: SceneRecord[] = [];
  private expanded = new Set<number>();
  private conflict: ConflictContext | null = null;
  private inlineErrors = new Map<number, string>();
  private bannerText: string | null = null;
  private onKeydown: ((event: KeyboardEvent) => void) | null = null;
  private onBeforeUnload: ((event: Event) => void) | null = null;

  private constructor(
    private readonly root: HTMLElement,
    private readonly api: ApiClient,
    readonly movieId: string,
    private readonly annotator: string,
  ) {}

  static async create(
    root: HTMLElement,
    api: ApiClient,
    movieId: string,
    annotator: string,
  ): Promise<App> {
    const app = new App(root, api, movieId, annotator);
    await app.load();
    app.bindGlobalHandlers();
    return app;
  }

  private async load(): Promise<void> {
    try {
      const [summary, scenes, alignment] = await Promise.all([
        this.api.getSummary(this.movieId),
        this.api.getScenes(this.movieId),
        this.api.getAlignment(this.movieId),
      ]);
      if (!summary.body || !scenes.body || !alignment.body) {
        this.bannerText = `cannot load movie '${this.movieId}': ${
          summary.detail ?? scenes.detail ?? alignment.detail ?? "unknown error"
        }`;
        this.scenes = [];
        this.state = new UiAlignmentState(this.movieId, [], [], []);
      } else {
        this.scenes = scenes.body;
        this.state = new UiAlignmentState(
          this.movieId,
          summary.body.sentences,
          alignment.body.sentences,
          this.scenes.map((s) => s.index),
        );
      }
    } catch (err) {
      this.bannerText = `network error: ${String(err)}`;
      this.scenes = [];
      this.state = new UiAlignmentState(this.movieId, [], [], []);
    }
    this.render();
  }

  private bindGlobalHandlers(): void {
    const doc = this.root.ownerDocument;
    this.onKeydown = (event) => {
      const target = event.target as HTMLElement | null;
      if (target && (target.tagName === "INPUT" || target.tagName === "TEXTAREA")) return;
      if (event.key === "j" || event.key === "ArrowDown") {
        this.state.selectNext(1);
        this.render();
      } else if (event.key === "k" || event.key === "ArrowUp") {
        this.state.selectNext(-1);
        this.render();
      } else if (event.key === "s") {
        if (this.state.selected !== null) void this.saveSentence(this.state.selected);
      }
    };
    doc.addEventListener("keydown", this.onKeydown);
    this.onBeforeUnload = (event) => {
      if (this.state.hasDirty()) {
        event.preventDefault();
      }
    };
    doc.defaultView?.addEventListener("beforeunload", this.onBeforeUnload);
  }

  /** Remove global listeners; required when replacing the app in one page. */
  destroy(): void {
    const doc = this.root.ownerDocument;
    if (this.onKeydown) doc.removeEventListener("keydown", this.onKeydown);
    if (this.onBeforeUnload) {
      doc.defaultView?.removeEventListener("beforeunload", this.onBeforeUnload);
    }
  }

  selectSentence(idx: number): void {
    this.state.select(idx);
    this.render();
  }

  toggleScene(sceneId: number): void {
    if (this.state.toggleScene(sceneId)) {
      this.render();
    }
  }

  async saveSentence(idx: number): Promise<void> {
    if (!this.state.isDirty(idx)) return;
    const sentence = this.state.sentences[idx];
    this.inlineErrors.delete(idx);
    let result;
    try {
      result = await this.api.saveSentence(this.movieId, idx, {
        scene_ids: [...sentence.sceneIds].sort((a, b) => a - b),
        annotator: this.annotator,
        expected_version: sentence.version,
      });
    } catch (err) {
      this.bannerText = `network error while saving: ${String(err)}`;
      this.render();
      return;
    }
    if (result.status === 200 && result.body) {
      this.state.applySaved(idx, result.body);
    } else if (result.status === 409) {
      this.conflict = { sentenceIdx: idx, detail: result.detail ?? "version conflict" };
    } else {
      this.inlineErrors.set(idx, result.detail ?? `HTTP ${result.status}`);
    }
    this.render();
  }

  /** Conflict resolution: fetch the current server record, keep or drop the
   *  local edit, and let the user save again against the fresh version. */
  async resolveConflict(keepLocalEdit: boolean): Promise<void> {
    if (!this.conflict) return;
    const idx = this.conflict.sentenceIdx;
    const alignment = await this.api.getAlignment(this.movieId);
    const entry = alignment.body?.sentences.find((e) => e.sentence_idx === idx);
    if (entry) {
      this.state.adoptServer(idx, entry, keepLocalEdit);
    }
    this.conflict = null;
    this.render();
  }

  hasDirty(): boolean {
    return this.state.hasDirty();
  }

  get stateForTest(): UiAlignmentState {
    return this.state;
  }

  jumpToScene(sceneId: number): void {
    const row = this.root.querySelector<HTMLElement>(`[data-scene-id="${sceneId}"]`);
    if (row) {
      row.classList.add("jump-target");
      if (typeof row.scrollIntoView === "function") row.scrollIntoView();
    }
  }

  render(): void {
    const doc = this.root.ownerDocument;
    this.root.textContent = "";

    const banner = doc.createElement("div");
    banner.className = "error-banner";
    if (this.bannerText) {
      banner.textContent = this.bannerText;
    } else {
      banner.hidden = true;
    }
    this.root.appendChild(banner);

    const header = doc.createElement("header");
    header.className = "app-header";
    header.textContent = `${this.movieId} — annotator: ${this.annotator}`;
    const jump = doc.createElement("input");
    jump.id = "scene-jump";
    jump.placeholder = "scene #";
    jump.addEventListener("keydown", (event) => {
      if (event.key === "Enter") {
        const value = Number.parseInt(jump.value, 10);
        if (!Number.isNaN(value)) this.jumpToScene(value);
      }
    });
    header.appendChild(jump);
    this.root.appendChild(header);

    if (this.state.sentences.length === 0) {
      const empty = doc.createElement("p");
      empty.className = "empty-state";
      empty.textContent = "No sentences to annotate in this corpus.";
      this.root.appendChild(empty);
      return;
    }

    const panes = doc.createElement("div");
    panes.className = "panes";
    panes.appendChild(this.renderSentencePane(doc));
    panes.appendChild(this.renderScenePane(doc));
    this.root.appendChild(panes);

    this.root.appendChild(this.renderConflictDialog(doc));
  }

  private renderSentencePane(doc: Document): HTMLElement {
    const pane = doc.createElement("section");
    pane.className = "sentence-pane";
    for (const sentence of this.state.sentences) {
      const idx = sentence.sentenceIdx;
      const row = doc.createElement("div");
      row.className = "sentence";
      row.dataset.idx = String(idx);
      if (this.state.selected === idx) row.classList.add("selected");
      if (this.state.isDirty(idx)) row.classList.add("dirty");
      row.addEventListener("click", () => this.selectSentence(idx));

      const badge = doc.createElement("span");
      badge.className = `badge ${sentence.source}`;
      badge.textContent = sentence.source;
      row.appendChild(badge);

      const text = doc.createElement("span");
      text.className = "sentence-text";
      text.textContent = `${idx}. ${sentence.text}`;
      row.appendChild(text);

      const chips = doc.createElement("span");
      chips.className = "chips";
      chips.textContent = [...sentence.sceneIds].sort((a, b) => a - b).join(", ");
      row.appendChild(chips);

      const save = doc.createElement("button");
      save.className = "save";
      save.textContent = this.state.isDirty(idx) ? "save*" : "save";
      save.disabled = !this.state.isDirty(idx);
      save.addEventListener("click", (event) => {
        event.stopPropagation();
        void this.saveSentence(idx);
      });
      row.appendChild(save);

      const error = this.inlineErrors.get(idx);
      if (error) {
        const span = doc.createElement("span");
        span.className = "inline-error";
        span.textContent = error;
        row.appendChild(span);
      }
      pane.appendChild(row);
    }
    return pane;
  }

  private renderScenePane(doc: Document): HTMLElement {
    const pane = doc.createElement("section");
    pane.className = "scene-pane";
    const selected = this.state.selectedSentence;
    for (const scene of this.scenes) {
      const row = doc.createElement("div");
      row.className = "scene";
      row.dataset.sceneId = String(scene.index);
      if (selected?.sceneIds.has(scene.index)) row.classList.add("aligned");

      const toggle = doc.createElement("button");
      toggle.className = "toggle";
      toggle.textContent = selected?.sceneIds.has(scene.index) ? "−" : "+";
      toggle.addEventListener("click", (event) => {
        event.stopPropagation();
        this.toggleScene(scene.index);
      });
      row.appendChild(toggle);

      const heading = doc.createElement("strong");
      heading.textContent = `${scene.index}. ${scene.heading}`;
      row.appendChild(heading);

      const body = doc.createElement("span");
      const words = scene.body.split(/\s+/).filter(Boolean);
      const isExpanded = this.expanded.has(scene.index);
      body.className = isExpanded ? "scene-body expanded" : "scene-body";
      body.textContent = isExpanded
        ? scene.body
        : words.slice(0, PREVIEW_TOKENS).join(" ") +
          (words.length > PREVIEW_TOKENS ? " …" : "");
      row.appendChild(body);

      row.addEventListener("click", () => {
        if (this.expanded.has(scene.index)) {
          this.expanded.delete(scene.index);
        } else {
          this.expanded.add(scene.index);
        }
        this.render();
      });
      pane.appendChild(row);
    }
    return pane;
  }

  private renderConflictDialog(doc: Document): HTMLElement {
    const dialog = doc.createElement("div");
    dialog.className = "conflict-dialog";
    if (!this.conflict) {
      dialog.hidden = true;
      return dialog;
    }
    const message = doc.createElement("p");
    message.textContent =
      `Sentence ${this.conflict.sentenceIdx} was changed by someone else ` +
      `(${this.conflict.detail}).`;
    dialog.appendChild(message);

    const reload = doc.createElement("button");
    reload.id = "conflict-reload";
    reload.textContent = "Reload and re-apply my edit";
    reload.addEventListener("click", () => void this.resolveConflict(true));
    dialog.appendChild(reload);

    const discard = doc.createElement("button");
    discard.id = "conflict-discard";
    discard.textContent = "Discard my edit";
    discard.addEventListener("click", () => void this.resolveConflict(false));
    dialog.appendChild(discard);
    return dialog;
  }
}

export type { AlignmentEntry };
