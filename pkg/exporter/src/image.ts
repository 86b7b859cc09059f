/** Image loading and conversions shared by the CLI and the model backend. */

import { readFileSync } from 'fs'
import { PNG } from 'pngjs'
import { loadTensor } from './stsr.js'

export interface RgbImage {
  /** interleaved RGB bytes, length height*width*3 */
  data: Uint8Array
  height: number
  width: number
}

/** Scale [0,1] values to bytes, rounding half away from zero, clipping to [0,255].
 *  Mirrors the Python toolkit's conversion bit for bit. */
export function unitToUint8(values: Float32Array): Uint8Array {
  const out = new Uint8Array(values.length)
  for (let i = 0; i < values.length; i++) {
    const scaled = values[i] * 255
    const rounded = Math.sign(scaled) * Math.floor(Math.abs(scaled) + 0.5)
    out[i] = Math.min(255, Math.max(0, rounded))
  }
  return out
}

/** Planar [3,H,W] floats in [0,1] to interleaved RGB bytes. */
export function planarUnitToRgb(values: Float32Array, height: number, width: number): RgbImage {
  const plane = height * width
  const bytes = unitToUint8(values)
  const data = new Uint8Array(plane * 3)
  for (let i = 0; i < plane; i++) {
    data[3 * i] = bytes[i]
    data[3 * i + 1] = bytes[plane + i]
    data[3 * i + 2] = bytes[2 * plane + i]
  }
  return { data, height, width }
}

export function loadRgbImage(path: string): RgbImage {
  if (path.toLowerCase().endsWith('.png')) {
    const png = PNG.sync.read(readFileSync(path))
    const data = new Uint8Array(png.width * png.height * 3)
    for (let i = 0; i < png.width * png.height; i++) {
      data[3 * i] = png.data[4 * i]
      data[3 * i + 1] = png.data[4 * i + 1]
      data[3 * i + 2] = png.data[4 * i + 2]
    }
    return { data, height: png.height, width: png.width }
  }
  const tensor = loadTensor(path)
  if (tensor.dtype === 'f32' && tensor.shape.length === 3 && tensor.shape[0] === 3) {
    return planarUnitToRgb(tensor.data as Float32Array, tensor.shape[1], tensor.shape[2])
  }
  if (tensor.dtype === 'u8' && tensor.shape.length === 3 && tensor.shape[0] === 3) {
    const [, height, width] = tensor.shape
    const plane = height * width
    const src = tensor.data as Uint8Array
    const data = new Uint8Array(plane * 3)
    for (let i = 0; i < plane; i++) {
      data[3 * i] = src[i]
      data[3 * i + 1] = src[plane + i]
      data[3 * i + 2] = src[2 * plane + i]
    }
    return { data, height, width }
  }
  throw new Error(
    `${path}: expected an STSR f32/u8 [3,H,W] image or a PNG file, got ${tensor.dtype} [${tensor.shape}]`
  )
}

/** Bilinear resize of an interleaved RGB image (used for model preprocessing). */
export function resizeRgb(img: RgbImage, outH: number, outW: number): RgbImage {
  const out = new Uint8Array(outH * outW * 3)
  const scaleY = img.height / outH
  const scaleX = img.width / outW
  for (let y = 0; y < outH; y++) {
    const sy = Math.min(img.height - 1, Math.max(0, (y + 0.5) * scaleY - 0.5))
    const y0 = Math.floor(sy)
    const y1 = Math.min(img.height - 1, y0 + 1)
    const fy = sy - y0
    for (let x = 0; x < outW; x++) {
      const sx = Math.min(img.width - 1, Math.max(0, (x + 0.5) * scaleX - 0.5))
      const x0 = Math.floor(sx)
      const x1 = Math.min(img.width - 1, x0 + 1)
      const fx = sx - x0
      for (let c = 0; c < 3; c++) {
        const v00 = img.data[3 * (y0 * img.width + x0) + c]
        const v01 = img.data[3 * (y0 * img.width + x1) + c]
        const v10 = img.data[3 * (y1 * img.width + x0) + c]
        const v11 = img.data[3 * (y1 * img.width + x1) + c]
        const top = v00 + (v01 - v00) * fx
        const bottom = v10 + (v11 - v10) * fx
        out[3 * (y * outW + x) + c] = Math.round(top + (bottom - top) * fy)
      }
    }
  }
  return { data: out, height: outH, width: outW }
}
