import { describe, expect, it } from "vitest"

import type { ApiClient } from "../src/api.js"
import {
  SessionController,
  nextUnlabeled,
  readingOrder,
  selectStep,
  withBoxes,
  withLetter,
} from "../src/session.js"
import type { BoxCoords, BoxOut } from "../src/types.js"

const box = (id: number, coords: BoxCoords, letter: string | null = null): BoxOut => ({
  id,
  box: coords,
  version: 1,
  letter,
})

describe("readingOrder", () => {
  it("sorts by row then column regardless of id", () => {
    const boxes = [box(5, [50, 40, 59, 49]), box(2, [0, 0, 9, 9]), box(9, [30, 1, 39, 9])]
    expect(readingOrder(boxes).map((b) => b.id)).toEqual([2, 9, 5])
  })
})

describe("selectStep", () => {
  const state = {
    pageId: "p",
    boxes: [box(1, [0, 0, 9, 9]), box(2, [20, 0, 29, 9]), box(3, [40, 0, 49, 9])],
    selectedId: 2,
  }

  it("steps forward and wraps", () => {
    expect(selectStep(state, 1).selectedId).toBe(3)
    expect(selectStep({ ...state, selectedId: 3 }, 1).selectedId).toBe(1)
  })

  it("steps backward", () => {
    expect(selectStep(state, -1).selectedId).toBe(1)
  })

  it("selects the first box when nothing is selected", () => {
    expect(selectStep({ ...state, selectedId: null }, 1).selectedId).toBe(1)
  })

  it("handles an empty page", () => {
    expect(selectStep({ pageId: "p", boxes: [], selectedId: 7 }, 1).selectedId).toBeNull()
  })
})

describe("withBoxes / withLetter", () => {
  it("keeps the selection when the box survives", () => {
    const s = { pageId: "p", boxes: [box(1, [0, 0, 9, 9])], selectedId: 1 }
    expect(withBoxes(s, [box(1, [0, 0, 9, 9]), box(2, [20, 0, 29, 9])]).selectedId).toBe(1)
  })

  it("falls back to the first box when the selection vanished", () => {
    const s = { pageId: "p", boxes: [box(1, [0, 0, 9, 9])], selectedId: 1 }
    expect(withBoxes(s, [box(4, [20, 0, 29, 9])]).selectedId).toBe(4)
  })

  it("withLetter marks only the target box", () => {
    const s = { pageId: "p", boxes: [box(1, [0, 0, 9, 9]), box(2, [20, 0, 29, 9])], selectedId: 1 }
    const after = withLetter(s, 2, "q")
    expect(after.boxes[0].letter).toBeNull()
    expect(after.boxes[1].letter).toBe("q")
  })
})

describe("nextUnlabeled", () => {
  it("finds the next unlabeled box after the selection, wrapping", () => {
    const s = {
      pageId: "p",
      boxes: [box(1, [0, 0, 9, 9]), box(2, [20, 0, 29, 9], "a"), box(3, [40, 0, 49, 9])],
      selectedId: 3,
    }
    expect(nextUnlabeled(s)?.id).toBe(1)
  })

  it("returns null when everything is labeled", () => {
    const s = { pageId: "p", boxes: [box(1, [0, 0, 9, 9], "a")], selectedId: 1 }
    expect(nextUnlabeled(s)).toBeNull()
  })
})

// a fake client recording calls and simulating server box bookkeeping
function fakeApi(initial: BoxOut[]) {
  let boxes = initial.map((b) => ({ ...b }))
  let nextId = Math.max(...boxes.map((b) => b.id)) + 1
  const calls: string[] = []
  const api = {
    async listBoxes() {
      calls.push("list")
      return boxes.map((b) => ({ ...b }))
    },
    async label(_page: string, boxId: number, letter: string) {
      calls.push(`label ${boxId} ${letter}`)
      return { record_id: 0, page: "p", box: boxes.find((b) => b.id === boxId)!.box, letter }
    },
    async mergeBoxes(_page: string, targets: BoxOut[]) {
      calls.push(`merge ${targets.map((t) => t.id).join(",")}`)
      const ids = new Set(targets.map((t) => t.id))
      const xs = targets.flatMap((t) => [t.box[0], t.box[2]])
      const ys = targets.flatMap((t) => [t.box[1], t.box[3]])
      const merged: BoxOut = {
        id: nextId++,
        box: [Math.min(...xs), Math.min(...ys), Math.max(...xs), Math.max(...ys)],
        version: 1,
        letter: null,
      }
      boxes = boxes.filter((b) => !ids.has(b.id)).concat(merged)
      return boxes.map((b) => ({ ...b }))
    },
    async splitBox(_page: string, target: BoxOut, parts: number) {
      calls.push(`split ${target.id} ${parts}`)
      const [x0, y0, x1, y1] = target.box
      const w = x1 - x0 + 1
      const pieces: BoxOut[] = []
      let start = 0
      for (let i = 0; i < parts; i++) {
        const end = i === parts - 1 ? w - 1 : Math.floor(((i + 1) * w) / parts)
        pieces.push({ id: nextId++, box: [x0 + start, y0, x0 + end, y1], version: 1, letter: null })
        start = end + 1
      }
      boxes = boxes.filter((b) => b.id !== target.id).concat(pieces)
      return boxes.map((b) => ({ ...b }))
    },
  }
  return { api: api as unknown as ApiClient, calls, boxes: () => boxes }
}

describe("SessionController", () => {
  const initial = [box(1, [0, 0, 9, 9]), box(2, [20, 0, 29, 9]), box(3, [40, 0, 49, 9])]

  it("load selects the first box in reading order", async () => {
    const { api } = fakeApi(initial)
    const s = new SessionController(api, "p")
    await s.load()
    expect(s.state.selectedId).toBe(1)
  })

  it("labeling advances to the next unlabeled box", async () => {
    const { api, calls } = fakeApi(initial)
    const s = new SessionController(api, "p")
    await s.load()
    await s.labelSelected("x")
    expect(calls).toContain("label 1 x")
    expect(s.state.selectedId).toBe(2)
    expect(s.state.boxes.find((b) => b.id === 1)?.letter).toBe("x")
  })

  it("merge uses marked boxes plus the selection and selects the result", async () => {
    const { api, calls } = fakeApi(initial)
    const s = new SessionController(api, "p")
    await s.load()
    s.mark() // marks box 1
    s.select(1) // move to box 2
    await s.mergeMarked()
    expect(calls).toContain("merge 1,2")
    expect(s.state.boxes.length).toBe(2)
    expect(s.state.selectedId).toBe(4)
    expect(s.marked).toEqual([])
  })

  it("merge with fewer than two targets is a no-op", async () => {
    const { api, calls } = fakeApi(initial)
    const s = new SessionController(api, "p")
    await s.load()
    await s.mergeMarked()
    expect(calls.filter((c) => c.startsWith("merge"))).toEqual([])
  })

  it("split replaces the selected box", async () => {
    const { api } = fakeApi(initial)
    const s = new SessionController(api, "p")
    await s.load()
    await s.splitSelected(2)
    expect(s.state.boxes.length).toBe(4)
    expect(s.state.boxes.find((b) => b.id === 1)).toBeUndefined()
  })
})
