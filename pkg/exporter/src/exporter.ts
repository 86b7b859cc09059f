/** Orchestration: image in, masks from the generator, STSR out. */

import { writeFileSync } from 'fs'
import { generateMasks, AmgOptions, GeneratedMask, PromptPredictor } from './amg.js'
import { buildRegionMap, regionCount } from './regionMap.js'
import { saveTensor, Tensor } from './stsr.js'

export type OutputMode = 'mask-stack' | 'region-map'

export interface ExportResult {
  maskCount: number
  regionCount: number
  warnings: string[]
}

export function masksToStack(masks: GeneratedMask[], height: number, width: number): Tensor {
  if (masks.length === 0) {
    // extents must be >= 1: an all-zero [1,H,W] stack encodes "no masks"
    return { dtype: 'u8', shape: [1, height, width], data: new Uint8Array(height * width) }
  }
  const plane = height * width
  const data = new Uint8Array(masks.length * plane)
  masks.forEach((mask, i) => data.set(mask.data, i * plane))
  return { dtype: 'u8', shape: [masks.length, height, width], data }
}

export function masksToRegionMap(masks: GeneratedMask[], height: number, width: number): Tensor {
  const labels = buildRegionMap(
    masks.map(m => ({ data: m.data, height, width })),
    height,
    width
  )
  return { dtype: 'i32', shape: [height, width], data: labels }
}

export async function runExport(
  predictor: PromptPredictor,
  mode: OutputMode,
  outputPath: string,
  options: Partial<AmgOptions>,
  settings: Record<string, unknown>
): Promise<ExportResult> {
  const masks = await generateMasks(predictor, options)
  const warnings: string[] = []
  if (masks.length === 0) {
    warnings.push('no masks generated; writing an empty stack')
  }
  const { height, width } = predictor
  const tensor = mode === 'region-map'
    ? masksToRegionMap(masks, height, width)
    : masksToStack(masks, height, width)
  saveTensor(tensor, outputPath)

  const regions = mode === 'region-map'
    ? regionCount(tensor.data as Int32Array)
    : regionCount(masksToRegionMap(masks, height, width).data as Int32Array)
  writeFileSync(
    `${outputPath}.manifest.json`,
    JSON.stringify({ mode, settings, maskCount: masks.length, regionCount: regions }, null, 2) + '\n'
  )
  return { maskCount: masks.length, regionCount: regions, warnings }
}
