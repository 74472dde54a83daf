import { ApiClient, ApiError } from "./api.js"
import { interpretKey } from "./keys.js"
import { drawOverlay, overlayRects } from "./render.js"
import { SessionController } from "./session.js"

const SCALE = 2

function statusLine(text: string): void {
  const el = document.getElementById("status")
  if (el) el.textContent = text
}

async function loadPageImage(url: string): Promise<HTMLImageElement> {
  const img = new Image()
  img.src = url
  await img.decode()
  return img
}

async function run(): Promise<void> {
  const api = new ApiClient("")
  const canvas = document.getElementById("page") as HTMLCanvasElement
  const ctx = canvas.getContext("2d")!

  const pages = await api.listPages()
  if (pages.length === 0) {
    statusLine("no pages found")
    return
  }
  const pageId = new URLSearchParams(location.search).get("page") ?? pages[0]
  const session = new SessionController(api, pageId)
  await session.load()
  const img = await loadPageImage(api.pageImageUrl(pageId))
  canvas.width = img.naturalWidth * SCALE
  canvas.height = img.naturalHeight * SCALE

  const redraw = () => {
    ctx.imageSmoothingEnabled = false
    ctx.drawImage(img, 0, 0, canvas.width, canvas.height)
    drawOverlay(
      ctx,
      overlayRects(session.state.boxes, session.state.selectedId, session.marked, SCALE),
    )
    const total = session.state.boxes.length
    const done = session.state.boxes.filter((b) => b.letter).length
    statusLine(`${pageId}: ${done}/${total} labeled`)
  }

  document.addEventListener("keydown", async (ev) => {
    const cmd = interpretKey(ev.key, ev.ctrlKey || ev.metaKey)
    if (!cmd) return
    ev.preventDefault()
    try {
      switch (cmd.kind) {
        case "next":
          session.select(1)
          break
        case "prev":
          session.select(-1)
          break
        case "mark":
          session.mark()
          break
        case "merge":
          await session.mergeMarked()
          break
        case "split":
          await session.splitSelected()
          break
        case "label":
          await session.labelSelected(cmd.letter)
          break
        case "export": {
          const res = await api.exportDataset()
          statusLine(`exported ${res.manifest.length} glyphs to ${res.export_dir}`)
          return
        }
      }
    } catch (e) {
      if (e instanceof ApiError && e.status === 409) {
        // someone else moved this box: refresh and keep going
        await session.load()
      } else {
        statusLine(e instanceof Error ? e.message : String(e))
      }
    }
    redraw()
  })

  redraw()
}

run().catch((e) => statusLine(String(e)))
