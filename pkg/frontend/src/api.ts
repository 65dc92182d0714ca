// Typed client for the annotation session API. Errors carry the server's
// {error, detail} payload and are always thrown, never swallowed.

export interface Box {
  x: number
  y: number
  w: number
  h: number
}

export interface StrokeInput {
  kind: 'fg' | 'bg'
  points: [number, number][]
}

export interface SessionSummary {
  id: string
  width: number
  height: number
  revision: number
  bbox: Box | null
  strokes: number
  rounds: number
  seed: number
  has_mask: boolean
}

export class ApiError extends Error {
  status: number
  code: string

  constructor(status: number, code: string, detail: string) {
    super(detail)
    this.status = status
    this.code = code
  }
}

async function check(res: Response): Promise<Response> {
  if (res.ok) return res
  let code = 'http_error'
  let detail = `${res.status} ${res.statusText}`
  try {
    const body = await res.json()
    if (body && typeof body === 'object') {
      code = body.error ?? code
      detail = body.detail ?? detail
    }
  } catch {
    // non-JSON error body: keep the status line
  }
  throw new ApiError(res.status, code, detail)
}

export async function createSession(baseUrl: string, image: BlobPart): Promise<{ id: string }> {
  const res = await fetch(`${baseUrl}/sessions`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/octet-stream' },
    body: new Blob([image]),
  })
  return (await check(res)).json()
}

export async function getSession(baseUrl: string, id: string): Promise<SessionSummary> {
  const res = await fetch(`${baseUrl}/sessions/${id}`)
  return (await check(res)).json()
}

export async function setBbox(baseUrl: string, id: string, box: Box): Promise<{ revision: number }> {
  const res = await fetch(`${baseUrl}/sessions/${id}/bbox`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify(box),
  })
  return (await check(res)).json()
}

export async function addStrokes(
  baseUrl: string,
  id: string,
  strokes: StrokeInput[],
): Promise<{ revision: number }> {
  const res = await fetch(`${baseUrl}/sessions/${id}/strokes`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ strokes }),
  })
  return (await check(res)).json()
}

export async function iterate(
  baseUrl: string,
  id: string,
  rounds: number,
): Promise<{ revision: number; foreground_pixels: number }> {
  const res = await fetch(`${baseUrl}/sessions/${id}/iterate`, {
    method: 'POST',
    headers: { 'Content-Type': 'application/json' },
    body: JSON.stringify({ rounds }),
  })
  return (await check(res)).json()
}

export async function fetchMask(baseUrl: string, id: string): Promise<Uint8Array> {
  const res = await fetch(`${baseUrl}/sessions/${id}/mask`)
  await check(res)
  return new Uint8Array(await res.arrayBuffer())
}
