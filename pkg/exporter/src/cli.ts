#!/usr/bin/env node
/** Command-line mask exporter.
 *
 * Reads a fused RGB image (STSR f32/u8 [3,H,W] or PNG), runs automatic
 * mask generation with loose settings over the ONNX backend, and writes an
 * STSR mask stack (u8 [Q,H,W]) or region map (i32 [H,W]). Q is reported on
 * stdout. Settings are recorded in a JSON manifest next to the output.
 */

import yargs from 'yargs'
import { hideBin } from 'yargs/helpers'
import { DEFAULT_AMG_OPTIONS } from './amg.js'
import { runExport, OutputMode } from './exporter.js'
import { loadRgbImage } from './image.js'
import { loadOnnxPredictor, SetupError } from './onnxBackend.js'

export async function main(argv: string[]): Promise<number> {
  const args = await yargs(argv)
    .option('checkpoint', { type: 'string', demandOption: true, describe: 'directory with encoder.onnx and decoder.onnx' })
    .option('variant', { type: 'string', default: 'vit-huge', describe: 'model variant name, recorded in the manifest' })
    .option('pred-iou-thresh', { type: 'number', default: DEFAULT_AMG_OPTIONS.predIouThresh })
    .option('points-per-side', { type: 'number', default: DEFAULT_AMG_OPTIONS.pointsPerSide })
    .option('stability-thresh', { type: 'number', default: DEFAULT_AMG_OPTIONS.stabilityThresh })
    .option('input', { type: 'string', demandOption: true, describe: 'STSR [3,H,W] or PNG image' })
    .option('output', { type: 'string', demandOption: true, describe: 'output STSR path' })
    .option('mode', { choices: ['mask-stack', 'region-map'] as const, default: 'mask-stack' as OutputMode })
    .strict()
    .parse()

  if (args.predIouThresh <= 0 || args.predIouThresh > 1) {
    console.error('error: pred-iou-thresh must be in (0, 1]')
    return 1
  }

  try {
    const image = loadRgbImage(args.input)
    const predictor = await loadOnnxPredictor(args.checkpoint, image)
    const result = await runExport(
      predictor,
      args.mode,
      args.output,
      {
        predIouThresh: args.predIouThresh,
        pointsPerSide: args.pointsPerSide,
        stabilityThresh: args.stabilityThresh,
      },
      {
        checkpoint: args.checkpoint,
        variant: args.variant,
        predIouThresh: args.predIouThresh,
        pointsPerSide: args.pointsPerSide,
        stabilityThresh: args.stabilityThresh,
        input: args.input,
      }
    )
    for (const warning of result.warnings) console.warn(`warning: ${warning}`)
    console.log(`masks=${result.maskCount}`)
    console.log(`regions=${result.regionCount}`)
    return 0
  } catch (err) {
    const kind = err instanceof SetupError ? 'setup' : 'run'
    console.error(`error: type=${kind} msg="${err instanceof Error ? err.message : err}"`)
    return 1
  }
}

const invokedDirectly = process.argv[1] && import.meta.url.endsWith(process.argv[1].split('/').pop()!)
if (invokedDirectly) {
  main(hideBin(process.argv)).then(code => process.exit(code))
}
