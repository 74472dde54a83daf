// Wire types for the labeling service. Boxes are [x_min, y_min, x_max, y_max]
// with inclusive edges, matching the server.

export type BoxCoords = [number, number, number, number]

export interface BoxOut {
  id: number
  box: BoxCoords
  version: number
  letter: string | null
}

export interface AdjustResponse {
  box: BoxOut
  thumbnail_png_b64: string | null
}

export interface LabelResponse {
  record_id: number
  page: string
  box: BoxCoords
  letter: string
}

export interface ManifestRow {
  file: string
  letter: string
  page: string
  box: BoxCoords
  hash: string
}

export interface ExportResponse {
  export_dir: string
  manifest: ManifestRow[]
}
