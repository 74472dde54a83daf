import type { ApiClient } from "./api.js"
import type { BoxOut } from "./types.js"

// Reading order for the overlay and for selection stepping: top-to-bottom
// by y_min, then left-to-right. Box ids are allocation order on the server
// and say nothing about position.
export function readingOrder(boxes: BoxOut[]): BoxOut[] {
  return [...boxes].sort((a, b) => a.box[1] - b.box[1] || a.box[0] - b.box[0])
}

export interface SessionState {
  pageId: string
  boxes: BoxOut[]
  selectedId: number | null
}

export function selectStep(state: SessionState, delta: 1 | -1): SessionState {
  const ordered = readingOrder(state.boxes)
  if (ordered.length === 0) return { ...state, selectedId: null }
  const idx = ordered.findIndex((b) => b.id === state.selectedId)
  if (idx < 0) return { ...state, selectedId: ordered[0].id }
  const next = (idx + delta + ordered.length) % ordered.length
  return { ...state, selectedId: ordered[next].id }
}

export function selectedBox(state: SessionState): BoxOut | null {
  return state.boxes.find((b) => b.id === state.selectedId) ?? null
}

export function withBoxes(state: SessionState, boxes: BoxOut[]): SessionState {
  const stillThere = boxes.some((b) => b.id === state.selectedId)
  return {
    ...state,
    boxes,
    selectedId: stillThere ? state.selectedId : (readingOrder(boxes)[0]?.id ?? null),
  }
}

export function withLetter(state: SessionState, boxId: number, letter: string): SessionState {
  return {
    ...state,
    boxes: state.boxes.map((b) => (b.id === boxId ? { ...b, letter } : b)),
  }
}

export function nextUnlabeled(state: SessionState): BoxOut | null {
  const ordered = readingOrder(state.boxes)
  const from = ordered.findIndex((b) => b.id === state.selectedId)
  for (let i = 1; i <= ordered.length; i++) {
    const b = ordered[(Math.max(from, 0) + i) % ordered.length]
    if (b.letter === null) return b
  }
  return null
}

/**
 * Drives one labeling session against the service. Mutations go to the
 * server first; local state only changes on success, so the overlay never
 * shows a state the store did not acknowledge.
 */
export class SessionController {
  state: SessionState
  // ids the user has marked for the next merge
  marked: number[] = []

  constructor(
    private readonly api: ApiClient,
    pageId: string,
  ) {
    this.state = { pageId, boxes: [], selectedId: null }
  }

  async load(): Promise<void> {
    const boxes = await this.api.listBoxes(this.state.pageId)
    this.state = withBoxes(this.state, boxes)
  }

  select(delta: 1 | -1): void {
    this.state = selectStep(this.state, delta)
  }

  mark(): void {
    const sel = selectedBox(this.state)
    if (sel && !this.marked.includes(sel.id)) this.marked.push(sel.id)
  }

  async labelSelected(letter: string): Promise<void> {
    const sel = selectedBox(this.state)
    if (!sel) return
    await this.api.label(this.state.pageId, sel.id, letter)
    this.state = withLetter(this.state, sel.id, letter)
    const next = nextUnlabeled(this.state)
    if (next) this.state = { ...this.state, selectedId: next.id }
  }

  /** Merge the marked boxes (plus the selection) into one. */
  async mergeMarked(): Promise<void> {
    const sel = selectedBox(this.state)
    const ids = new Set(this.marked)
    if (sel) ids.add(sel.id)
    const targets = this.state.boxes.filter((b) => ids.has(b.id))
    if (targets.length < 2) return
    const boxes = await this.api.mergeBoxes(this.state.pageId, targets)
    this.marked = []
    this.state = withBoxes(this.state, boxes)
    // land on the merged box: the one with the highest id is the new one
    const newest = boxes.reduce((a, b) => (b.id > a.id ? b : a))
    this.state = { ...this.state, selectedId: newest.id }
  }

  async splitSelected(parts = 2): Promise<void> {
    const sel = selectedBox(this.state)
    if (!sel) return
    const boxes = await this.api.splitBox(this.state.pageId, sel, parts)
    this.state = withBoxes(this.state, boxes)
  }

  async nudgeSelected(dx0: number, dy0: number, dx1: number, dy1: number): Promise<void> {
    const sel = selectedBox(this.state)
    if (!sel) return
    const [x0, y0, x1, y1] = sel.box
    const res = await this.api.adjustBox(
      this.state.pageId,
      sel.id,
      [x0 + dx0, y0 + dy0, x1 + dx1, y1 + dy1],
      sel.version,
    )
    this.state = withBoxes(
      this.state,
      this.state.boxes.map((b) => (b.id === res.box.id ? res.box : b)),
    )
  }
}
