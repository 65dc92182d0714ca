import { describe, expect, it } from 'vitest'

import {
  canIssueMutation,
  initialState,
  reduce,
  replay,
  UiEvent,
  UiState,
} from '../src/state.js'

const created: UiEvent = { type: 'session_created', id: 'abc123', width: 32, height: 32 }
const boxReq: UiEvent = { type: 'bbox_requested', box: { x: 4, y: 4, w: 10, h: 10 } }
const boxAck: UiEvent = { type: 'bbox_ack', revision: 1 }

function applyAll(events: UiEvent[]): UiState {
  let state = initialState
  for (const ev of events) state = reduce(state, ev)
  return state
}

describe('reducer', () => {
  it('is pure: same inputs give structurally equal outputs', () => {
    const a = reduce(initialState, created)
    const b = reduce(initialState, created)
    expect(a).toEqual(b)
    expect(initialState.sessionId).toBeNull() // untouched
  })

  it('bbox flows request -> ack and bumps revision', () => {
    const state = applyAll([created, boxReq, boxAck])
    expect(state.bbox).toEqual({ x: 4, y: 4, w: 10, h: 10 })
    expect(state.pendingBox).toBeNull()
    expect(state.revision).toBe(1)
    expect(state.mutationInFlight).toBe(false)
  })

  it('new bbox clears the mask (server restarts the segmentation)', () => {
    const state = applyAll([
      created,
      boxReq,
      boxAck,
      { type: 'iterate_requested', rounds: 1 },
      { type: 'iterate_ack', revision: 2, foregroundPixels: 9 },
      {
        type: 'mask_loaded',
        revision: 2,
        mask: { width: 2, height: 2, foreground: new Uint8Array([1, 0, 0, 0]) },
      },
      { type: 'bbox_requested', box: { x: 1, y: 1, w: 8, h: 8 } },
      { type: 'bbox_ack', revision: 3 },
    ])
    expect(state.mask).toBeNull()
    expect(state.foregroundPixels).toBe(0)
    expect(state.revision).toBe(3)
  })

  it('discards stale acknowledgements (revision not above current)', () => {
    const fresh = applyAll([created, boxReq, boxAck])
    const replayedAck = reduce(fresh, { type: 'iterate_ack', revision: 1, foregroundPixels: 99 })
    expect(replayedAck.foregroundPixels).toBe(0)
    expect(replayedAck.revision).toBe(1)
    const older = reduce(fresh, { type: 'strokes_ack', revision: 0 })
    expect(older.strokes).toEqual([])
    expect(older.revision).toBe(1)
  })

  it('drops masks older than the one displayed', () => {
    const withMask = applyAll([
      created,
      boxReq,
      boxAck,
      {
        type: 'mask_loaded',
        revision: 5,
        mask: { width: 1, height: 1, foreground: new Uint8Array([1]) },
      },
    ])
    const out = reduce(withMask, {
      type: 'mask_loaded',
      revision: 4,
      mask: { width: 1, height: 1, foreground: new Uint8Array([0]) },
    })
    expect(out.mask!.foreground[0]).toBe(1)
    expect(out.maskRevision).toBe(5)
  })

  it('gates mutations while one is in flight', () => {
    const inFlight = applyAll([created, boxReq])
    expect(canIssueMutation(inFlight)).toBe(false)
    const blocked = reduce(inFlight, { type: 'iterate_requested', rounds: 3 })
    expect(blocked).toEqual(inFlight) // second mutation is a no-op
    const afterAck = reduce(inFlight, boxAck)
    expect(canIssueMutation(afterAck)).toBe(true)
  })

  it('failure clears in-flight and pending, surfaces the message', () => {
    const failed = applyAll([created, boxReq, { type: 'request_failed', message: 'no background sample' }])
    expect(failed.mutationInFlight).toBe(false)
    expect(failed.pendingBox).toBeNull()
    expect(failed.bbox).toBeNull()
    expect(failed.lastError).toBe('no background sample')
  })

  it('strokes accumulate in order', () => {
    const state = applyAll([
      created,
      boxReq,
      boxAck,
      { type: 'strokes_requested', strokes: [{ kind: 'fg', points: [[1, 1], [2, 2]] }] },
      { type: 'strokes_ack', revision: 2 },
      { type: 'kind_toggled', kind: 'bg' },
      { type: 'strokes_requested', strokes: [{ kind: 'bg', points: [[3, 3]] }] },
      { type: 'strokes_ack', revision: 3 },
    ])
    expect(state.strokes.map((s) => s.kind)).toEqual(['fg', 'bg'])
    expect(state.revision).toBe(3)
  })
})

describe('event-log replay', () => {
  it('reproduces the final state from the recorded log', () => {
    const log: UiEvent[] = [
      created,
      { type: 'radius_set', radius: 5 },
      boxReq,
      boxAck,
      { type: 'strokes_requested', strokes: [{ kind: 'fg', points: [[6, 6], [9, 6]] }] },
      { type: 'strokes_ack', revision: 2 },
      { type: 'iterate_requested', rounds: 2 },
      { type: 'iterate_ack', revision: 3, foregroundPixels: 42 },
      {
        type: 'mask_loaded',
        revision: 3,
        mask: { width: 2, height: 2, foreground: new Uint8Array([1, 1, 0, 0]) },
      },
      { type: 'iterate_requested', rounds: 1 },
      { type: 'request_failed', message: 'boom' },
    ]
    const live = applyAll(log)
    expect(replay(log)).toEqual(live)
  })

  it('replay is insensitive to how many times it runs', () => {
    const log: UiEvent[] = [created, boxReq, boxAck]
    expect(replay(log)).toEqual(replay(log))
  })
})
