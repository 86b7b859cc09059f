/** Point-prompt predictor backed by ONNX exports of the segmentation model.
 *
 * The checkpoint is a directory with two files:
 *   encoder.onnx  input  "image" f32 [1,3,1024,1024], pixel-normalized
 *                 output "image_embeddings" f32 [1,256,64,64]
 *   decoder.onnx  the standard prompt-decoder signature (image_embeddings,
 *                 point_coords, point_labels, mask_input, has_mask_input,
 *                 orig_im_size) producing full-resolution mask logits and
 *                 per-mask IoU predictions.
 *
 * onnxruntime-node is loaded lazily so the exporter (and its tests) work
 * without the native runtime installed.
 */

import { existsSync } from 'fs'
import { join } from 'path'
import type { MaskCandidate, PromptPredictor } from './amg.js'
import { resizeRgb, RgbImage } from './image.js'

export const ENCODER_SIDE = 1024
const PIXEL_MEAN = [123.675, 116.28, 103.53]
const PIXEL_STD = [58.395, 57.12, 57.375]

export class SetupError extends Error {}

// Minimal structural view of onnxruntime-node; the module itself is an
// optional dependency loaded lazily with a non-literal specifier so the
// exporter compiles and tests without the native runtime.
interface OrtTensor {
  data: unknown
  dims: readonly number[]
}
interface OrtSession {
  outputNames: readonly string[]
  run(feeds: Record<string, OrtTensor>): Promise<Record<string, OrtTensor>>
}
interface OrtApi {
  InferenceSession: { create(path: string): Promise<OrtSession> }
  Tensor: new (type: string, data: Float32Array, dims: number[]) => OrtTensor
}

const ORT_MODULE = 'onnxruntime-node'

/** Longest-side scale used by the encoder preprocessing. */
export function encoderScale(height: number, width: number): number {
  return ENCODER_SIDE / Math.max(height, width)
}

/** Resize to the encoder's long side, normalize, pad to a square planar tensor. */
export function preprocess(img: RgbImage): { tensor: Float32Array; scaledH: number; scaledW: number } {
  const scale = encoderScale(img.height, img.width)
  const scaledH = Math.round(img.height * scale)
  const scaledW = Math.round(img.width * scale)
  const resized = resizeRgb(img, scaledH, scaledW)
  const tensor = new Float32Array(3 * ENCODER_SIDE * ENCODER_SIDE)
  for (let c = 0; c < 3; c++) {
    const plane = c * ENCODER_SIDE * ENCODER_SIDE
    for (let y = 0; y < scaledH; y++) {
      for (let x = 0; x < scaledW; x++) {
        const value = resized.data[3 * (y * scaledW + x) + c]
        tensor[plane + y * ENCODER_SIDE + x] = (value - PIXEL_MEAN[c]) / PIXEL_STD[c]
      }
    }
  }
  return { tensor, scaledH, scaledW }
}

export async function loadOnnxPredictor(
  checkpointDir: string,
  image: RgbImage
): Promise<PromptPredictor> {
  const encoderPath = join(checkpointDir, 'encoder.onnx')
  const decoderPath = join(checkpointDir, 'decoder.onnx')
  if (!existsSync(encoderPath) || !existsSync(decoderPath)) {
    throw new SetupError(
      `checkpoint directory ${checkpointDir} must contain encoder.onnx and decoder.onnx`
    )
  }
  let ort: OrtApi
  try {
    ort = (await import(ORT_MODULE)) as OrtApi
  } catch {
    throw new SetupError(
      'onnxruntime-node is not installed; add it to run the ONNX backend'
    )
  }

  const encoder = await ort.InferenceSession.create(encoderPath)
  const decoder = await ort.InferenceSession.create(decoderPath)
  const { tensor } = preprocess(image)
  const encoded = await encoder.run({
    image: new ort.Tensor('float32', tensor, [1, 3, ENCODER_SIDE, ENCODER_SIDE]),
  })
  const embeddings = encoded[encoder.outputNames[0]]
  const scale = encoderScale(image.height, image.width)

  return {
    height: image.height,
    width: image.width,
    async predict(x: number, y: number): Promise<MaskCandidate[]> {
      const feeds = {
        image_embeddings: embeddings,
        point_coords: new ort.Tensor('float32', Float32Array.from([x * scale, y * scale, 0, 0]), [1, 2, 2]),
        point_labels: new ort.Tensor('float32', Float32Array.from([1, -1]), [1, 2]),
        mask_input: new ort.Tensor('float32', new Float32Array(256 * 256), [1, 1, 256, 256]),
        has_mask_input: new ort.Tensor('float32', Float32Array.from([0]), [1]),
        orig_im_size: new ort.Tensor('float32', Float32Array.from([image.height, image.width]), [2]),
      }
      const out = await decoder.run(feeds)
      const masks = out['masks']
      const ious = out['iou_predictions']
      const [, count, h, w] = masks.dims as number[]
      const plane = h * w
      const logits = masks.data as Float32Array
      const scores = ious.data as Float32Array
      const candidates: MaskCandidate[] = []
      for (let m = 0; m < count; m++) {
        candidates.push({
          logits: logits.slice(m * plane, (m + 1) * plane),
          predictedIou: scores[m],
        })
      }
      return candidates
    },
  }
}
