// Client session state as a pure reducer over (previous state, event).
//
// Two invariants live here:
//  - the client revision only advances from server acknowledgements, and a
//    response carrying a revision at or below the current one is discarded;
//  - at most one mutating request is in flight (the gate is part of the
//    state, so replaying a recorded event log reproduces the final state).

import type { Box, StrokeInput } from './api.js'

export interface MaskBitmap {
  width: number
  height: number
  foreground: Uint8Array // 1 = foreground pixel
}

export type UiEvent =
  | { type: 'session_created'; id: string; width: number; height: number }
  | { type: 'kind_toggled'; kind: 'fg' | 'bg' }
  | { type: 'radius_set'; radius: number }
  | { type: 'bbox_requested'; box: Box }
  | { type: 'bbox_ack'; revision: number }
  | { type: 'strokes_requested'; strokes: StrokeInput[] }
  | { type: 'strokes_ack'; revision: number }
  | { type: 'iterate_requested'; rounds: number }
  | { type: 'iterate_ack'; revision: number; foregroundPixels: number }
  | { type: 'mask_loaded'; revision: number; mask: MaskBitmap }
  | { type: 'request_failed'; message: string }

export interface UiState {
  sessionId: string | null
  imageWidth: number
  imageHeight: number
  bbox: Box | null
  pendingBox: Box | null
  strokes: StrokeInput[]
  pendingStrokes: StrokeInput[] | null
  strokeKind: 'fg' | 'bg'
  brushRadius: number
  revision: number
  foregroundPixels: number
  mask: MaskBitmap | null
  maskRevision: number
  mutationInFlight: boolean
  lastError: string | null
}

export const initialState: UiState = {
  sessionId: null,
  imageWidth: 0,
  imageHeight: 0,
  bbox: null,
  pendingBox: null,
  strokes: [],
  pendingStrokes: null,
  strokeKind: 'fg',
  brushRadius: 3,
  revision: 0,
  foregroundPixels: 0,
  mask: null,
  maskRevision: -1,
  mutationInFlight: false,
  lastError: null,
}

export function canIssueMutation(state: UiState): boolean {
  return state.sessionId !== null && !state.mutationInFlight
}

function stale(state: UiState, revision: number): boolean {
  return revision <= state.revision
}

export function reduce(state: UiState, event: UiEvent): UiState {
  switch (event.type) {
    case 'session_created':
      return {
        ...initialState,
        sessionId: event.id,
        imageWidth: event.width,
        imageHeight: event.height,
        strokeKind: state.strokeKind,
        brushRadius: state.brushRadius,
      }

    case 'kind_toggled':
      return { ...state, strokeKind: event.kind }

    case 'radius_set':
      return { ...state, brushRadius: Math.max(1, Math.floor(event.radius)) }

    case 'bbox_requested':
      if (!canIssueMutation(state)) return state
      return { ...state, pendingBox: event.box, mutationInFlight: true, lastError: null }

    case 'bbox_ack':
      if (stale(state, event.revision)) return { ...state, mutationInFlight: false }
      return {
        ...state,
        bbox: state.pendingBox ?? state.bbox,
        pendingBox: null,
        revision: event.revision,
        mutationInFlight: false,
        // the server resets accumulated rounds and mask on a new box
        mask: null,
        maskRevision: -1,
        foregroundPixels: 0,
      }

    case 'strokes_requested':
      if (!canIssueMutation(state)) return state
      return { ...state, pendingStrokes: event.strokes, mutationInFlight: true, lastError: null }

    case 'strokes_ack':
      if (stale(state, event.revision)) return { ...state, mutationInFlight: false }
      return {
        ...state,
        strokes: [...state.strokes, ...(state.pendingStrokes ?? [])],
        pendingStrokes: null,
        revision: event.revision,
        mutationInFlight: false,
      }

    case 'iterate_requested':
      if (!canIssueMutation(state)) return state
      return { ...state, mutationInFlight: true, lastError: null }

    case 'iterate_ack':
      if (stale(state, event.revision)) return { ...state, mutationInFlight: false }
      return {
        ...state,
        revision: event.revision,
        foregroundPixels: event.foregroundPixels,
        mutationInFlight: false,
      }

    case 'mask_loaded':
      // reads are not revision-bumping; drop masks older than the one shown
      if (event.revision < state.maskRevision) return state
      return { ...state, mask: event.mask, maskRevision: event.revision }

    case 'request_failed':
      return {
        ...state,
        pendingBox: null,
        pendingStrokes: null,
        mutationInFlight: false,
        lastError: event.message,
      }
  }
}

export function replay(events: UiEvent[]): UiState {
  return events.reduce(reduce, initialState)
}
