// Binary PGM (P5) mask parsing and overlay pixel generation.

import type { MaskBitmap } from './state.js'

export function parsePgmMask(bytes: Uint8Array): MaskBitmap {
  if (bytes[0] !== 0x50 || bytes[1] !== 0x35) {
    throw new Error('not a P5 PGM mask')
  }
  let pos = 2
  const fields: number[] = []
  while (fields.length < 3) {
    while (pos < bytes.length && isSpace(bytes[pos])) pos++
    if (bytes[pos] === 0x23) {
      // '#' comment
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++
      continue
    }
    let start = pos
    while (pos < bytes.length && !isSpace(bytes[pos])) pos++
    if (start === pos) throw new Error(`truncated PGM header at byte ${pos}`)
    fields.push(parseInt(new TextDecoder().decode(bytes.subarray(start, pos)), 10))
  }
  pos++ // single whitespace after maxval
  const [width, height, maxval] = fields
  if (!Number.isFinite(width) || !Number.isFinite(height) || maxval > 255) {
    throw new Error('bad PGM header')
  }
  const need = width * height
  if (bytes.length - pos < need) {
    throw new Error(`truncated PGM payload: need ${need} bytes, have ${bytes.length - pos}`)
  }
  const foreground = new Uint8Array(need)
  for (let i = 0; i < need; i++) {
    foreground[i] = bytes[pos + i] >= 128 ? 1 : 0
  }
  return { width, height, foreground }
}

function isSpace(byte: number): boolean {
  return byte === 0x20 || byte === 0x09 || byte === 0x0a || byte === 0x0d
}

// Okabe-Ito orange: distinguishable under common color-vision deficiencies.
export const OVERLAY_RGB: [number, number, number] = [230, 159, 0]

export function maskOverlayPixels(mask: MaskBitmap, opacity = 0.5): Uint8ClampedArray<ArrayBuffer> {
  const out = new Uint8ClampedArray(mask.width * mask.height * 4)
  const alpha = Math.round(opacity * 255)
  for (let i = 0; i < mask.foreground.length; i++) {
    if (mask.foreground[i]) {
      out[4 * i] = OVERLAY_RGB[0]
      out[4 * i + 1] = OVERLAY_RGB[1]
      out[4 * i + 2] = OVERLAY_RGB[2]
      out[4 * i + 3] = alpha
    }
  }
  return out
}

export function foregroundCount(mask: MaskBitmap): number {
  let count = 0
  for (const v of mask.foreground) count += v
  return count
}
