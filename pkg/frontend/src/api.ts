import type { AdjustResponse, BoxCoords, BoxOut, ExportResponse, LabelResponse } from "./types.js"

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message)
  }
}

type FetchLike = typeof fetch

async function parseError(res: Response): Promise<never> {
  let code = "unknown"
  let message = res.statusText
  try {
    const body = await res.json()
    if (body && typeof body.detail === "object") {
      code = body.detail.code ?? code
      message = body.detail.message ?? message
    }
  } catch {
    // non-JSON error body: keep the status text
  }
  throw new ApiError(res.status, code, message)
}

export class ApiClient {
  constructor(
    readonly baseUrl: string,
    private readonly fetchImpl: FetchLike = fetch,
  ) {}

  private async get<T>(path: string): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path)
    if (!res.ok) await parseError(res)
    return res.json() as Promise<T>
  }

  private async post<T>(path: string, body: unknown): Promise<T> {
    const res = await this.fetchImpl(this.baseUrl + path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(body),
    })
    if (!res.ok) await parseError(res)
    return res.json() as Promise<T>
  }

  async listPages(): Promise<string[]> {
    const body = await this.get<{ pages: string[] }>("/api/pages")
    return body.pages
  }

  pageImageUrl(pageId: string): string {
    return `${this.baseUrl}/api/pages/${encodeURIComponent(pageId)}/image`
  }

  listBoxes(pageId: string): Promise<BoxOut[]> {
    return this.get(`/api/pages/${encodeURIComponent(pageId)}/boxes`)
  }

  adjustBox(pageId: string, boxId: number, box: BoxCoords, version: number): Promise<AdjustResponse> {
    return this.post(`/api/pages/${encodeURIComponent(pageId)}/boxes`, {
      box_id: boxId,
      box,
      version,
    })
  }

  mergeBoxes(pageId: string, boxes: BoxOut[]): Promise<BoxOut[]> {
    return this.post(`/api/pages/${encodeURIComponent(pageId)}/boxes/merge`, {
      box_ids: boxes.map((b) => b.id),
      versions: boxes.map((b) => b.version),
    })
  }

  splitBox(pageId: string, box: BoxOut, parts: number): Promise<BoxOut[]> {
    return this.post(`/api/pages/${encodeURIComponent(pageId)}/boxes/split`, {
      box_id: box.id,
      version: box.version,
      parts,
    })
  }

  label(pageId: string, boxId: number, letter: string, who = "ui"): Promise<LabelResponse> {
    return this.post("/api/labels", { page: pageId, box_id: boxId, letter, who })
  }

  exportDataset(): Promise<ExportResponse> {
    return this.get("/api/export")
  }
}
