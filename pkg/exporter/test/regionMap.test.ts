import { readFileSync } from 'fs'
import { join } from 'path'
import { describe, expect, it } from 'vitest'
import { buildRegionMap, regionCount, BinaryMask } from '../src/regionMap.js'
import { decodeTensor, encodeTensor, loadTensor } from '../src/stsr.js'

const FIXTURES = join(__dirname, 'fixtures')

function rect(h: number, w: number, y0: number, y1: number, x0: number, x1: number): BinaryMask {
  const data = new Uint8Array(h * w)
  for (let y = y0; y < y1; y++) for (let x = x0; x < x1; x++) data[y * w + x] = 1
  return { data, height: h, width: w }
}

describe('cross-boundary equivalence with the Python toolkit', () => {
  it('rebuilds the fixture mask stack into byte-identical region-map STSR', () => {
    const stack = loadTensor(join(FIXTURES, 'mask_stack.stsr'))
    const [q, h, w] = stack.shape
    const bytes = stack.data as Uint8Array
    const masks: BinaryMask[] = []
    for (let i = 0; i < q; i++) {
      masks.push({ data: bytes.subarray(i * h * w, (i + 1) * h * w), height: h, width: w })
    }
    const labels = buildRegionMap(masks, h, w)
    const encoded = encodeTensor({ dtype: 'i32', shape: [h, w], data: labels })
    const expected = readFileSync(join(FIXTURES, 'region_map.stsr'))
    expect(Buffer.compare(encoded, expected)).toBe(0)
  })
})

describe('region map semantics', () => {
  it('paints larger masks first so smaller masks win overlaps', () => {
    const outer = rect(8, 8, 0, 8, 0, 8)
    const inner = rect(8, 8, 3, 5, 3, 5)
    const labels = buildRegionMap([inner, outer], 8, 8)
    expect(labels[4 * 8 + 4]).toBe(2) // nested small region kept
    expect(labels[0]).toBe(1)
    expect(regionCount(labels)).toBe(2)
  })

  it('ids descend by area with ties kept in input order', () => {
    const a = rect(4, 4, 0, 1, 0, 2) // 2 px
    const b = rect(4, 4, 2, 3, 0, 2) // 2 px
    const big = rect(4, 4, 0, 4, 2, 4) // 8 px
    const labels = buildRegionMap([a, b, big], 4, 4)
    expect(labels[0 * 4 + 2]).toBe(1) // big got id 1
    expect(labels[0]).toBe(2) // first tie next
    expect(labels[2 * 4 + 0]).toBe(3)
  })

  it('uncovered pixels stay background and empty input is all background', () => {
    const labels = buildRegionMap([rect(4, 4, 0, 1, 0, 1)], 4, 4)
    expect(labels[15]).toBe(0)
    const empty = buildRegionMap([], 3, 5)
    expect([...new Set(empty)]).toEqual([0])
  })

  it('fully covered masks vanish and ids stay contiguous', () => {
    const hidden = rect(6, 6, 2, 4, 2, 4) // will be fully overpainted
    const cover = rect(6, 6, 1, 5, 1, 5)
    const labels = buildRegionMap([cover, hidden], 6, 6)
    // hidden (4 px) painted after cover (16 px): it survives instead; invert
    expect(regionCount(labels)).toBe(2)
    const speck = rect(6, 6, 2, 4, 2, 4)
    const total = rect(6, 6, 0, 6, 0, 6)
    // speck (4 px) painted last, overwrites the middle of total
    const merged = buildRegionMap([speck, total], 6, 6)
    expect(merged[2 * 6 + 2]).toBe(2)
    expect(regionCount(merged)).toBe(2)
  })

  it('rejects extent mismatches', () => {
    expect(() => buildRegionMap([rect(3, 3, 0, 1, 0, 1)], 4, 4)).toThrow(/extent/)
  })
})
