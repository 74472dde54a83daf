export type KeyCommand =
  | { kind: "label"; letter: string }
  | { kind: "next" }
  | { kind: "prev" }
  | { kind: "mark" }
  | { kind: "merge" }
  | { kind: "split" }
  | { kind: "export" }

// Plain a-z labels the selected box. Everything else is a chorded or
// punctuation command so labeling stays one keystroke per glyph.
export function interpretKey(key: string, ctrl = false): KeyCommand | null {
  if (ctrl) return null
  switch (key) {
    case "Tab":
    case "ArrowRight":
      return { kind: "next" }
    case "ArrowLeft":
      return { kind: "prev" }
    case " ":
      return { kind: "mark" }
    case "Enter":
      return { kind: "merge" }
    case "|":
      return { kind: "split" }
    case "!":
      return { kind: "export" }
    default:
      if (key.length === 1 && key >= "a" && key <= "z") {
        return { kind: "label", letter: key }
      }
      return null
  }
}
