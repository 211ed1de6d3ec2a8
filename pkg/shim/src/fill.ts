import { ShimError } from './job';

/**
 * Fill masked pixels from the nearest valid pixel to the right.
 *
 * Disocclusions from left-to-right warping open up on the far side of the
 * foreground, so the background continuation lives to the hole's right.
 * Pixels with no valid right neighbor take the nearest valid one on the
 * left; fully-masked rows copy the nearest row that has any valid pixel,
 * after that row has been filled (ties go to the smaller row index).
 * Unmasked pixels pass through untouched.
 *
 * This mirrors the builtin baseline backend byte for byte so the two
 * implementations can cross-check each other over the job protocol.
 */
export function maskedFill(
    pixels: Buffer,
    bits: Uint8Array,
    width: number,
    height: number,
): Buffer {
    const out = Buffer.from(pixels);
    const rowsWithValid: number[] = [];
    const emptyRows: number[] = [];

    for (let y = 0; y < height; y++) {
        const rowOff = y * width;
        // nearest valid source column to the right of every position
        const rightSrc = new Int32Array(width);
        let next = width; // width stands for "none"
        for (let x = width - 1; x >= 0; x--) {
            if (bits[rowOff + x] === 0) {
                next = x;
            }
            rightSrc[x] = next;
        }
        // nearest valid source column to the left
        const leftSrc = new Int32Array(width);
        let prev = -1;
        for (let x = 0; x < width; x++) {
            if (bits[rowOff + x] === 0) {
                prev = x;
            }
            leftSrc[x] = prev;
        }
        const hasValid = prev >= 0;
        if (!hasValid) {
            emptyRows.push(y);
            continue;
        }
        rowsWithValid.push(y);
        for (let x = 0; x < width; x++) {
            if (bits[rowOff + x] === 0) {
                continue;
            }
            const src = rightSrc[x] < width ? rightSrc[x] : leftSrc[x];
            out[(rowOff + x) * 3] = pixels[(rowOff + src) * 3];
            out[(rowOff + x) * 3 + 1] = pixels[(rowOff + src) * 3 + 1];
            out[(rowOff + x) * 3 + 2] = pixels[(rowOff + src) * 3 + 2];
        }
    }

    if (rowsWithValid.length === 0) {
        throw new ShimError('FullyMaskedFrame', 'every pixel is masked');
    }
    for (const y of emptyRows) {
        let nearest = rowsWithValid[0];
        for (const candidate of rowsWithValid) {
            if (Math.abs(candidate - y) < Math.abs(nearest - y)) {
                nearest = candidate;
            }
        }
        out.copy(out, y * width * 3, nearest * width * 3, (nearest + 1) * width * 3);
    }
    return out;
}
