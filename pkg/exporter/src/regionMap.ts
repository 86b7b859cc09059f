/** Flattens binary masks into one int32 label image.
 *
 * Byte-compatible with the Python toolkit's region maps: masks are painted
 * in descending area order (ties keep their input order) so smaller masks
 * overwrite larger ones, uncovered pixels stay 0, and surviving ids are
 * relabeled contiguously from 1 preserving the paint order.
 */

export interface BinaryMask {
  /** nonzero = inside, length height*width, row-major */
  data: Uint8Array
  height: number
  width: number
}

export function buildRegionMap(masks: BinaryMask[], height: number, width: number): Int32Array {
  const labels = new Int32Array(height * width)
  for (const [i, mask] of masks.entries()) {
    if (mask.height !== height || mask.width !== width) {
      throw new Error(
        `mask ${i} has extent ${mask.height}x${mask.width}, expected ${height}x${width}`
      )
    }
  }

  const areas = masks.map(m => {
    let area = 0
    for (let i = 0; i < m.data.length; i++) if (m.data[i]) area++
    return area
  })
  const order = masks.map((_, i) => i).sort((a, b) => areas[b] - areas[a] || a - b)

  for (let rank = 0; rank < order.length; rank++) {
    const mask = masks[order[rank]].data
    const paint = rank + 1
    for (let i = 0; i < labels.length; i++) {
      if (mask[i]) labels[i] = paint
    }
  }

  // relabel contiguous, keeping paint order among surviving ids
  const present = new Set<number>()
  for (let i = 0; i < labels.length; i++) if (labels[i] !== 0) present.add(labels[i])
  const survivors = [...present].sort((a, b) => a - b)
  const lut = new Int32Array(masks.length + 1)
  survivors.forEach((id, rank) => {
    lut[id] = rank + 1
  })
  for (let i = 0; i < labels.length; i++) labels[i] = lut[labels[i]]
  return labels
}

export function regionCount(labels: Int32Array): number {
  const ids = new Set<number>()
  for (let i = 0; i < labels.length; i++) if (labels[i] !== 0) ids.add(labels[i])
  return ids.size
}
