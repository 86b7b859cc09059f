/** STSR tensor container, byte-compatible with the Python toolkit.
 *
 * Layout (little-endian): magic "STSR" | version u8=1 | dtype u8
 * (0=f32, 1=i32, 2=u16, 3=u8) | ndim u8 | pad u8=0 | shape ndim x u64 |
 * row-major payload. Header size is 8 + 8*ndim bytes.
 */

import { readFileSync, writeFileSync, renameSync } from 'fs'

export type StsrDtype = 'f32' | 'i32' | 'u16' | 'u8'
export type StsrData = Float32Array | Int32Array | Uint16Array | Uint8Array

export interface Tensor {
  dtype: StsrDtype
  shape: number[]
  data: StsrData
}

const VERSION = 1
const MAX_NDIM = 8

const DTYPE_CODES: Record<StsrDtype, number> = { f32: 0, i32: 1, u16: 2, u8: 3 }
const CODE_DTYPES: StsrDtype[] = ['f32', 'i32', 'u16', 'u8']
const ITEM_SIZE: Record<StsrDtype, number> = { f32: 4, i32: 4, u16: 2, u8: 1 }

export class StsrFormatError extends Error {}
export class StsrCorruptionError extends Error {}

function elementCount(shape: number[]): number {
  return shape.reduce((a, b) => a * b, 1)
}

export function encodeTensor(t: Tensor): Buffer {
  if (t.shape.length < 1 || t.shape.length > MAX_NDIM) {
    throw new StsrFormatError(`ndim must be 1..${MAX_NDIM}, got ${t.shape.length}`)
  }
  if (t.shape.some(e => e < 1 || !Number.isInteger(e))) {
    throw new StsrFormatError(`every extent must be a positive integer, got [${t.shape}]`)
  }
  if (elementCount(t.shape) !== t.data.length) {
    throw new StsrFormatError(
      `shape [${t.shape}] implies ${elementCount(t.shape)} values, data has ${t.data.length}`
    )
  }
  const itemSize = ITEM_SIZE[t.dtype]
  const headerSize = 8 + 8 * t.shape.length
  const buf = Buffer.alloc(headerSize + t.data.length * itemSize)
  buf.write('STSR', 0, 'ascii')
  buf.writeUInt8(VERSION, 4)
  buf.writeUInt8(DTYPE_CODES[t.dtype], 5)
  buf.writeUInt8(t.shape.length, 6)
  buf.writeUInt8(0, 7)
  t.shape.forEach((extent, i) => buf.writeBigUInt64LE(BigInt(extent), 8 + 8 * i))

  // Explicit little-endian writes keep the payload platform independent.
  const view = new DataView(buf.buffer, buf.byteOffset + headerSize)
  const data = t.data
  if (data instanceof Float32Array) {
    for (let i = 0; i < data.length; i++) view.setFloat32(4 * i, data[i], true)
  } else if (data instanceof Int32Array) {
    for (let i = 0; i < data.length; i++) view.setInt32(4 * i, data[i], true)
  } else if (data instanceof Uint16Array) {
    for (let i = 0; i < data.length; i++) view.setUint16(2 * i, data[i], true)
  } else {
    buf.set(data, headerSize)
  }
  return buf
}

export function decodeTensor(buf: Buffer, source = '<buffer>'): Tensor {
  if (buf.length < 8 || buf.toString('ascii', 0, 4) !== 'STSR') {
    throw new StsrFormatError(`${source}: not an STSR file (bad magic)`)
  }
  const version = buf.readUInt8(4)
  if (version !== VERSION) throw new StsrFormatError(`${source}: unsupported version ${version}`)
  const code = buf.readUInt8(5)
  if (code >= CODE_DTYPES.length) throw new StsrFormatError(`${source}: unknown dtype code ${code}`)
  const ndim = buf.readUInt8(6)
  if (ndim < 1 || ndim > MAX_NDIM) throw new StsrFormatError(`${source}: ndim ${ndim} outside 1..8`)
  const headerSize = 8 + 8 * ndim
  if (buf.length < headerSize) throw new StsrCorruptionError(`${source}: truncated header`)

  const shape: number[] = []
  for (let i = 0; i < ndim; i++) {
    const extent = buf.readBigUInt64LE(8 + 8 * i)
    if (extent < 1n) throw new StsrFormatError(`${source}: zero extent in shape`)
    shape.push(Number(extent))
  }
  const dtype = CODE_DTYPES[code]
  const count = elementCount(shape)
  const expected = headerSize + count * ITEM_SIZE[dtype]
  if (buf.length !== expected) {
    throw new StsrCorruptionError(
      `${source}: payload is ${buf.length - headerSize} bytes, expected ${expected - headerSize}`
    )
  }

  const view = new DataView(buf.buffer, buf.byteOffset + headerSize)
  let data: StsrData
  switch (dtype) {
    case 'f32': {
      const out = new Float32Array(count)
      for (let i = 0; i < count; i++) out[i] = view.getFloat32(4 * i, true)
      data = out
      break
    }
    case 'i32': {
      const out = new Int32Array(count)
      for (let i = 0; i < count; i++) out[i] = view.getInt32(4 * i, true)
      data = out
      break
    }
    case 'u16': {
      const out = new Uint16Array(count)
      for (let i = 0; i < count; i++) out[i] = view.getUint16(2 * i, true)
      data = out
      break
    }
    default:
      data = Uint8Array.from(buf.subarray(headerSize))
  }
  return { dtype, shape, data }
}

export function saveTensor(t: Tensor, path: string): void {
  const tmp = `${path}.tmp`
  writeFileSync(tmp, encodeTensor(t))
  renameSync(tmp, path)
}

export function loadTensor(path: string): Tensor {
  return decodeTensor(readFileSync(path), path)
}
