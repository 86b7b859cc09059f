/** Automatic mask generation: grid prompting, quality filtering, and
 * deduplication over any point-prompt mask predictor.
 *
 * The pipeline mirrors the standard automatic generator: prompt every
 * point of a regular grid, keep mask candidates whose predicted IoU and
 * stability score clear their thresholds, binarize, then greedily drop
 * near-duplicates by bounding-box IoU. Loose defaults
 * (predIouThresh=0.7) keep small but meaningful regions.
 */

export interface MaskCandidate {
  /** logits over the full image, length height*width */
  logits: Float32Array
  predictedIou: number
}

export interface PromptPredictor {
  readonly height: number
  readonly width: number
  /** candidates for one (x, y) point prompt, image coordinates */
  predict(x: number, y: number): Promise<MaskCandidate[]>
}

export interface AmgOptions {
  pointsPerSide: number
  predIouThresh: number
  stabilityThresh: number
  stabilityOffset: number
  maskThreshold: number
  boxNmsThresh: number
}

export const DEFAULT_AMG_OPTIONS: AmgOptions = {
  pointsPerSide: 32,
  predIouThresh: 0.7,
  stabilityThresh: 0.95,
  stabilityOffset: 1.0,
  maskThreshold: 0.0,
  boxNmsThresh: 0.7,
}

export interface GeneratedMask {
  /** binary mask, length height*width */
  data: Uint8Array
  area: number
  predictedIou: number
  stability: number
  box: [number, number, number, number] // x0, y0, x1, y1 inclusive
}

/** Grid of prompt points at cell centers, row-major. */
export function pointGrid(height: number, width: number, pointsPerSide: number): [number, number][] {
  const points: [number, number][] = []
  for (let gy = 0; gy < pointsPerSide; gy++) {
    for (let gx = 0; gx < pointsPerSide; gx++) {
      points.push([((gx + 0.5) * width) / pointsPerSide, ((gy + 0.5) * height) / pointsPerSide])
    }
  }
  return points
}

/** Ratio of the mask areas at thresholds +/- offset around the cut. */
export function stabilityScore(logits: Float32Array, threshold: number, offset: number): number {
  let high = 0
  let low = 0
  for (let i = 0; i < logits.length; i++) {
    if (logits[i] > threshold + offset) high++
    if (logits[i] > threshold - offset) low++
  }
  return low === 0 ? 0 : high / low
}

function binarize(logits: Float32Array, threshold: number): GeneratedMask | null {
  const data = new Uint8Array(logits.length)
  let area = 0
  for (let i = 0; i < logits.length; i++) {
    if (logits[i] > threshold) {
      data[i] = 1
      area++
    }
  }
  if (area === 0) return null
  return { data, area, predictedIou: 0, stability: 0, box: [0, 0, 0, 0] }
}

function boundingBox(mask: Uint8Array, height: number, width: number): [number, number, number, number] {
  let x0 = width
  let y0 = height
  let x1 = -1
  let y1 = -1
  for (let y = 0; y < height; y++) {
    for (let x = 0; x < width; x++) {
      if (mask[y * width + x]) {
        if (x < x0) x0 = x
        if (x > x1) x1 = x
        if (y < y0) y0 = y
        if (y > y1) y1 = y
      }
    }
  }
  return [x0, y0, x1, y1]
}

export function boxIou(a: [number, number, number, number], b: [number, number, number, number]): number {
  const ix = Math.max(0, Math.min(a[2], b[2]) - Math.max(a[0], b[0]) + 1)
  const iy = Math.max(0, Math.min(a[3], b[3]) - Math.max(a[1], b[1]) + 1)
  const inter = ix * iy
  const areaA = (a[2] - a[0] + 1) * (a[3] - a[1] + 1)
  const areaB = (b[2] - b[0] + 1) * (b[3] - b[1] + 1)
  return inter / (areaA + areaB - inter)
}

/** Greedy bounding-box NMS, highest predicted IoU first. */
export function boxNms(masks: GeneratedMask[], thresh: number): GeneratedMask[] {
  const order = [...masks].sort((a, b) => b.predictedIou - a.predictedIou)
  const kept: GeneratedMask[] = []
  for (const candidate of order) {
    if (kept.every(k => boxIou(k.box, candidate.box) <= thresh)) {
      kept.push(candidate)
    }
  }
  return kept
}

export async function generateMasks(
  predictor: PromptPredictor,
  options: Partial<AmgOptions> = {}
): Promise<GeneratedMask[]> {
  const opts = { ...DEFAULT_AMG_OPTIONS, ...options }
  const candidates: GeneratedMask[] = []
  for (const [x, y] of pointGrid(predictor.height, predictor.width, opts.pointsPerSide)) {
    for (const cand of await predictor.predict(x, y)) {
      if (cand.predictedIou < opts.predIouThresh) continue
      const stability = stabilityScore(cand.logits, opts.maskThreshold, opts.stabilityOffset)
      if (stability < opts.stabilityThresh) continue
      const mask = binarize(cand.logits, opts.maskThreshold)
      if (!mask) continue
      mask.predictedIou = cand.predictedIou
      mask.stability = stability
      mask.box = boundingBox(mask.data, predictor.height, predictor.width)
      candidates.push(mask)
    }
  }
  return boxNms(candidates, opts.boxNmsThresh)
}
