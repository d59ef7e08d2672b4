// Rationale capture: browser selections over the displayed prediction
// text become character-offset spans over the exact submitted string.
//
// Internally spans use UTF-16 string indices (what the DOM and
// String.prototype.slice speak); the POST body converts them to Unicode
// code-point offsets, which is what the server validates against. For
// BMP content (all Hinglish/English text) the two coincide.

import type { RationaleBody } from "./types.js";

export interface Span {
  start: number;
  end: number;
}

export function mergeSpans(spans: Span[]): Span[] {
  const sorted = spans
    .filter((s) => s.end > s.start)
    .slice()
    .sort((a, b) => a.start - b.start || a.end - b.end);
  const merged: Span[] = [];
  for (const span of sorted) {
    const last = merged[merged.length - 1];
    if (last && span.start <= last.end) {
      last.end = Math.max(last.end, span.end);
    } else {
      merged.push({ ...span });
    }
  }
  return merged;
}

/** Offset of (node, offsetInNode) within the concatenated text content
 * of `container`. Element endpoints resolve to their child boundary. */
export function textOffset(container: Node, node: Node, offsetInNode: number): number {
  if (node.nodeType !== Node.TEXT_NODE) {
    // range endpoints on elements index child nodes
    let probe: Node | null = node.childNodes[offsetInNode] ?? null;
    if (probe === null) {
      // past the last child: offset equals the element's full text length
      return prefixLength(container, node) + (node.textContent ?? "").length;
    }
    return prefixLength(container, probe);
  }
  return prefixLength(container, node) + offsetInNode;
}

function prefixLength(container: Node, target: Node): number {
  const doc = container.ownerDocument ?? (container as Document);
  const walker = doc.createTreeWalker(container, 4 /* NodeFilter.SHOW_TEXT */);
  let total = 0;
  for (let current = walker.nextNode(); current; current = walker.nextNode()) {
    // stop at the target text node, or on entering the target element's subtree
    if (current === target || (target.nodeType !== Node.TEXT_NODE && target.contains(current))) {
      return total;
    }
    total += (current.textContent ?? "").length;
  }
  return total;
}

export function rangeToSpan(container: Node, range: Range): Span | null {
  const start = textOffset(container, range.startContainer, range.startOffset);
  const end = textOffset(container, range.endContainer, range.endOffset);
  const span = { start: Math.min(start, end), end: Math.max(start, end) };
  return span.end > span.start ? span : null;
}

export function selectionToSpans(container: Node, selection: Selection): Span[] {
  const spans: Span[] = [];
  for (let i = 0; i < selection.rangeCount; i++) {
    const span = rangeToSpan(container, selection.getRangeAt(i));
    if (span) spans.push(span);
  }
  return spans;
}

/** Expand a span outward to whitespace boundaries (word snapping). */
export function snapToWords(text: string, span: Span): Span {
  let { start, end } = span;
  while (start > 0 && !/\s/.test(text[start - 1])) start--;
  while (end < text.length && !/\s/.test(text[end])) end++;
  return { start, end };
}

/** UTF-16 span -> Unicode code point span over the same text. */
export function toCodePointSpan(text: string, span: Span): [number, number] {
  const before = Array.from(text.slice(0, span.start)).length;
  const inside = Array.from(text.slice(span.start, span.end)).length;
  return [before, before + inside];
}

export function contentHash(text: string): string {
  // FNV-1a over UTF-16 code units; stable, dependency-free sample_ref
  let hash = 0x811c9dc5;
  for (let i = 0; i < text.length; i++) {
    hash ^= text.charCodeAt(i);
    hash = Math.imul(hash, 0x01000193) >>> 0;
  }
  return "fnv:" + hash.toString(16).padStart(8, "0");
}

export function buildRationaleBody(
  text: string,
  spans: Span[],
  annotatorId: string,
  options: { snap?: boolean } = {},
): RationaleBody {
  const prepared = options.snap ? spans.map((s) => snapToWords(text, s)) : spans;
  return {
    sample_ref: contentHash(text),
    text,
    spans: mergeSpans(prepared).map((s) => toCodePointSpan(text, s)),
    annotator_id: annotatorId,
  };
}
