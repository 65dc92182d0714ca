// Canvas annotation tool: upload, bbox drag, stroke paint, iterate, overlay,
// export. All state changes flow through the reducer; every dispatched event
// is recorded so a session can be replayed for debugging.

import * as api from './api.js'
import type { Box, StrokeInput } from './api.js'
import { maskOverlayPixels, parsePgmMask } from './pgm.js'
import { canIssueMutation, initialState, reduce, UiEvent, UiState } from './state.js'

const BASE_URL = ''

let state: UiState = initialState
const eventLog: UiEvent[] = []
let imageBitmap: ImageBitmap | null = null
let rawMaskBytes: Uint8Array | null = null

type Mode = 'bbox' | 'stroke'
let mode: Mode = 'bbox'
let dragStart: [number, number] | null = null
let dragCurrent: [number, number] | null = null
let strokePoints: [number, number][] = []

const canvas = document.getElementById('canvas') as HTMLCanvasElement
const ctx = canvas.getContext('2d')!
const fileInput = document.getElementById('file') as HTMLInputElement
const modeBbox = document.getElementById('mode-bbox') as HTMLButtonElement
const modeFg = document.getElementById('mode-fg') as HTMLButtonElement
const modeBg = document.getElementById('mode-bg') as HTMLButtonElement
const radiusInput = document.getElementById('radius') as HTMLInputElement
const roundsInput = document.getElementById('rounds') as HTMLInputElement
const iterateButton = document.getElementById('iterate') as HTMLButtonElement
const exportPgmButton = document.getElementById('export-pgm') as HTMLButtonElement
const exportPngButton = document.getElementById('export-png') as HTMLButtonElement
const statusLine = document.getElementById('status')!
const errorLine = document.getElementById('error')!

function dispatch(event: UiEvent): void {
  eventLog.push(event)
  state = reduce(state, event)
  render()
}

function fail(err: unknown): void {
  const message = err instanceof Error ? err.message : String(err)
  dispatch({ type: 'request_failed', message })
}

// ------------------------------------------------------------------ upload

fileInput.addEventListener('change', async () => {
  const file = fileInput.files?.[0]
  if (!file) return
  try {
    const bytes = await file.arrayBuffer()
    const { id } = await api.createSession(BASE_URL, bytes)
    const summary = await api.getSession(BASE_URL, id)
    imageBitmap = await decodeForDisplay(bytes, summary.width, summary.height, file.type)
    rawMaskBytes = null
    dispatch({
      type: 'session_created',
      id,
      width: summary.width,
      height: summary.height,
    })
  } catch (err) {
    fail(err)
  }
})

async function decodeForDisplay(
  bytes: ArrayBuffer,
  width: number,
  height: number,
  mime: string,
): Promise<ImageBitmap> {
  if (mime === 'image/png') {
    return createImageBitmap(new Blob([bytes], { type: mime }))
  }
  // browsers cannot decode PPM: rebuild the pixels from the P6 payload
  const u8 = new Uint8Array(bytes)
  let pos = 2
  let fieldsSeen = 0
  while (fieldsSeen < 3 && pos < u8.length) {
    while (pos < u8.length && /\s/.test(String.fromCharCode(u8[pos]))) pos++
    if (u8[pos] === 0x23) {
      while (pos < u8.length && u8[pos] !== 0x0a) pos++
      continue
    }
    while (pos < u8.length && !/\s/.test(String.fromCharCode(u8[pos]))) pos++
    fieldsSeen++
  }
  pos++
  const rgba = new Uint8ClampedArray(width * height * 4)
  for (let i = 0; i < width * height; i++) {
    rgba[4 * i] = u8[pos + 3 * i]
    rgba[4 * i + 1] = u8[pos + 3 * i + 1]
    rgba[4 * i + 2] = u8[pos + 3 * i + 2]
    rgba[4 * i + 3] = 255
  }
  return createImageBitmap(new ImageData(rgba, width, height))
}

// ------------------------------------------------------------- interactions

modeBbox.addEventListener('click', () => {
  mode = 'bbox'
  render()
})
modeFg.addEventListener('click', () => {
  mode = 'stroke'
  dispatch({ type: 'kind_toggled', kind: 'fg' })
})
modeBg.addEventListener('click', () => {
  mode = 'stroke'
  dispatch({ type: 'kind_toggled', kind: 'bg' })
})
radiusInput.addEventListener('change', () => {
  dispatch({ type: 'radius_set', radius: Number(radiusInput.value) })
})

function canvasPoint(ev: MouseEvent): [number, number] {
  const rect = canvas.getBoundingClientRect()
  const x = Math.floor(((ev.clientX - rect.left) / rect.width) * canvas.width)
  const y = Math.floor(((ev.clientY - rect.top) / rect.height) * canvas.height)
  return [
    Math.max(0, Math.min(canvas.width - 1, x)),
    Math.max(0, Math.min(canvas.height - 1, y)),
  ]
}

canvas.addEventListener('mousedown', (ev) => {
  if (!state.sessionId) return
  const p = canvasPoint(ev)
  if (mode === 'bbox') {
    dragStart = p
    dragCurrent = p
  } else {
    strokePoints = [p]
  }
})

canvas.addEventListener('mousemove', (ev) => {
  if (mode === 'bbox' && dragStart) {
    dragCurrent = canvasPoint(ev)
    render()
  } else if (mode === 'stroke' && strokePoints.length) {
    strokePoints.push(canvasPoint(ev))
    render()
  }
})

canvas.addEventListener('mouseup', async () => {
  if (mode === 'bbox' && dragStart && dragCurrent) {
    const box: Box = {
      x: Math.min(dragStart[0], dragCurrent[0]),
      y: Math.min(dragStart[1], dragCurrent[1]),
      w: Math.abs(dragCurrent[0] - dragStart[0]) + 1,
      h: Math.abs(dragCurrent[1] - dragStart[1]) + 1,
    }
    dragStart = dragCurrent = null
    await sendBbox(box)
  } else if (mode === 'stroke' && strokePoints.length) {
    const stroke: StrokeInput = { kind: state.strokeKind, points: strokePoints }
    strokePoints = []
    await sendStrokes([stroke])
  }
})

async function sendBbox(box: Box): Promise<void> {
  if (!canIssueMutation(state)) return
  dispatch({ type: 'bbox_requested', box })
  try {
    const { revision } = await api.setBbox(BASE_URL, state.sessionId!, box)
    dispatch({ type: 'bbox_ack', revision })
  } catch (err) {
    fail(err)
  }
}

async function sendStrokes(strokes: StrokeInput[]): Promise<void> {
  if (!canIssueMutation(state)) return
  dispatch({ type: 'strokes_requested', strokes })
  try {
    const { revision } = await api.addStrokes(BASE_URL, state.sessionId!, strokes)
    dispatch({ type: 'strokes_ack', revision })
  } catch (err) {
    fail(err)
  }
}

iterateButton.addEventListener('click', async () => {
  if (!canIssueMutation(state)) return
  const rounds = Math.max(1, Number(roundsInput.value) || 1)
  dispatch({ type: 'iterate_requested', rounds })
  try {
    const ack = await api.iterate(BASE_URL, state.sessionId!, rounds)
    dispatch({ type: 'iterate_ack', revision: ack.revision, foregroundPixels: ack.foreground_pixels })
    rawMaskBytes = await api.fetchMask(BASE_URL, state.sessionId!)
    dispatch({ type: 'mask_loaded', revision: ack.revision, mask: parsePgmMask(rawMaskBytes) })
  } catch (err) {
    fail(err)
  }
})

// ----------------------------------------------------------------- export

exportPgmButton.addEventListener('click', () => {
  if (!rawMaskBytes) return
  download(new Blob([rawMaskBytes as BlobPart], { type: 'image/x-portable-graymap' }), 'mask.pgm')
})

exportPngButton.addEventListener('click', () => {
  if (!state.mask) return
  const off = document.createElement('canvas')
  off.width = state.mask.width
  off.height = state.mask.height
  const octx = off.getContext('2d')!
  const pixels = new Uint8ClampedArray(state.mask.width * state.mask.height * 4)
  for (let i = 0; i < state.mask.foreground.length; i++) {
    const v = state.mask.foreground[i] ? 255 : 0
    pixels[4 * i] = pixels[4 * i + 1] = pixels[4 * i + 2] = v
    pixels[4 * i + 3] = 255
  }
  octx.putImageData(new ImageData(pixels, off.width, off.height), 0, 0)
  off.toBlob((blob) => blob && download(blob, 'mask.png'), 'image/png')
})

function download(blob: Blob, name: string): void {
  const a = document.createElement('a')
  a.href = URL.createObjectURL(blob)
  a.download = name
  a.click()
  URL.revokeObjectURL(a.href)
}

// ----------------------------------------------------------------- render

function render(): void {
  if (state.imageWidth && (canvas.width !== state.imageWidth || canvas.height !== state.imageHeight)) {
    canvas.width = state.imageWidth
    canvas.height = state.imageHeight
  }
  ctx.clearRect(0, 0, canvas.width, canvas.height)
  if (imageBitmap) ctx.drawImage(imageBitmap, 0, 0)

  if (state.mask) {
    const overlay = new ImageData(maskOverlayPixels(state.mask), state.mask.width, state.mask.height)
    const off = document.createElement('canvas')
    off.width = state.mask.width
    off.height = state.mask.height
    off.getContext('2d')!.putImageData(overlay, 0, 0)
    ctx.drawImage(off, 0, 0)
  }

  const box = state.pendingBox ?? state.bbox
  if (box) {
    ctx.strokeStyle = '#1f77ff'
    ctx.lineWidth = 1
    ctx.strokeRect(box.x + 0.5, box.y + 0.5, box.w - 1, box.h - 1)
  }
  for (const stroke of state.strokes) drawStroke(stroke.points, stroke.kind)
  if (strokePoints.length) drawStroke(strokePoints, state.strokeKind)
  if (dragStart && dragCurrent) {
    ctx.strokeStyle = '#1f77ff'
    ctx.strokeRect(
      Math.min(dragStart[0], dragCurrent[0]) + 0.5,
      Math.min(dragStart[1], dragCurrent[1]) + 0.5,
      Math.abs(dragCurrent[0] - dragStart[0]),
      Math.abs(dragCurrent[1] - dragStart[1]),
    )
  }

  statusLine.textContent = state.sessionId
    ? `session ${state.sessionId.slice(0, 8)} rev ${state.revision}` +
      (state.mask ? ` fg ${state.foregroundPixels}px` : '') +
      (state.mutationInFlight ? ' …' : '')
    : 'upload a PPM or PNG image to begin'
  errorLine.textContent = state.lastError ?? ''
  iterateButton.disabled = !state.sessionId || !state.bbox || state.mutationInFlight
  exportPgmButton.disabled = !rawMaskBytes
  exportPngButton.disabled = !state.mask
}

function drawStroke(points: [number, number][], kind: 'fg' | 'bg'): void {
  ctx.strokeStyle = kind === 'fg' ? 'rgba(0,200,0,0.8)' : 'rgba(200,0,0,0.8)'
  ctx.lineWidth = state.brushRadius * 2 + 1
  ctx.lineCap = 'round'
  ctx.beginPath()
  const [x0, y0] = points[0]
  ctx.moveTo(x0, y0)
  for (const [x, y] of points.slice(1)) ctx.lineTo(x, y)
  ctx.stroke()
}

render()

// exposed for debugging: replaying this log reproduces the current state
;(window as unknown as { attnclustEventLog: UiEvent[] }).attnclustEventLog = eventLog
