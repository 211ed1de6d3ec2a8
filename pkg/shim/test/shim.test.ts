import { mkdirSync, mkdtempSync, readFileSync, writeFileSync } from 'fs';
import { tmpdir } from 'os';
import { join } from 'path';

import { PNG } from 'pngjs';
import { describe, expect, it } from 'vitest';

import { maskedFill } from '../src/fill';
import { frameName, loadJob, ShimError } from '../src/job';
import { run, runJob } from '../src/main';
import { readMask, readRgb, writeRgb } from '../src/png';

function tempDir(): string {
    return mkdtempSync(join(tmpdir(), 'shim-'));
}

function gray(width: number, height: number, value: number): Buffer {
    return Buffer.alloc(width * height * 3, value);
}

function writeMaskPng(path: string, bits: Uint8Array, width: number, height: number): void {
    const png = new PNG({ width, height });
    for (let i = 0; i < width * height; i++) {
        const value = bits[i] ? 255 : 0;
        png.data[i * 4] = value;
        png.data[i * 4 + 1] = value;
        png.data[i * 4 + 2] = value;
        png.data[i * 4 + 3] = 255;
    }
    writeFileSync(path, PNG.sync.write(png, { colorType: 0 }));
}

interface JobDirs {
    jobPath: string;
    inputDir: string;
    outputDir: string;
}

function writeJobDirs(
    frames: Buffer[],
    masks: Uint8Array[],
    width: number,
    height: number,
): JobDirs {
    const root = tempDir();
    const inputDir = join(root, 'input');
    const maskDir = join(root, 'mask');
    const outputDir = join(root, 'output');
    mkdirSync(inputDir);
    mkdirSync(maskDir);
    mkdirSync(outputDir);
    frames.forEach((pixels, i) => {
        writeRgb(join(inputDir, frameName(i)), { width, height, pixels });
        writeMaskPng(join(maskDir, frameName(i)), masks[i], width, height);
    });
    const jobPath = join(outputDir, 'job.json');
    writeFileSync(jobPath, JSON.stringify({
        version: '1',
        branch: 'left_to_right',
        input_frames: inputDir,
        mask: maskDir,
        output_frames: outputDir,
        width,
        height,
        frame_count: frames.length,
        extras: {},
    }));
    return { jobPath, inputDir, outputDir };
}

describe('maskedFill', () => {
    it('fills from the nearest valid pixel to the right', () => {
        const pixels = Buffer.from([10, 10, 10, 0, 0, 0, 0, 0, 0, 40, 40, 40]);
        const bits = Uint8Array.from([0, 1, 1, 0]);
        const out = maskedFill(pixels, bits, 4, 1);
        expect([...out]).toEqual([10, 10, 10, 40, 40, 40, 40, 40, 40, 40, 40, 40]);
    });

    it('falls back to the nearest valid pixel on the left', () => {
        const pixels = Buffer.from([10, 10, 10, 20, 20, 20, 0, 0, 0, 0, 0, 0]);
        const bits = Uint8Array.from([0, 0, 1, 1]);
        const out = maskedFill(pixels, bits, 4, 1);
        expect([...out]).toEqual([10, 10, 10, 20, 20, 20, 20, 20, 20, 20, 20, 20]);
    });

    it('leaves unmasked pixels untouched', () => {
        const pixels = Buffer.from([...Array(12).keys()]);
        const bits = Uint8Array.from([0, 0, 0, 0]);
        expect([...maskedFill(pixels, bits, 4, 1)]).toEqual([...pixels]);
    });

    it('copies the nearest filled row into fully-masked rows', () => {
        // rows 0 and 2 valid, row 1 fully masked: equidistant, row 0 wins
        const width = 2;
        const pixels = Buffer.concat([gray(width, 1, 11), gray(width, 1, 0), gray(width, 1, 33)]);
        const bits = Uint8Array.from([0, 0, 1, 1, 0, 0]);
        const out = maskedFill(pixels, bits, width, 3);
        expect([...out.subarray(width * 3, width * 6)]).toEqual([...gray(width, 1, 11)]);
    });

    it('copies the filled values, not the raw ones', () => {
        // row 0 is partly masked and row 1 fully masked; row 1 must receive
        // row 0 after its own fill
        const pixels = Buffer.from([50, 50, 50, 0, 0, 0, 0, 0, 0, 0, 0, 0]);
        const bits = Uint8Array.from([0, 1, 1, 1]);
        const out = maskedFill(pixels, bits, 2, 2);
        expect([...out]).toEqual([50, 50, 50, 50, 50, 50, 50, 50, 50, 50, 50, 50]);
    });

    it('rejects a fully masked frame', () => {
        const pixels = gray(2, 2, 7);
        const bits = Uint8Array.from([1, 1, 1, 1]);
        expect(() => maskedFill(pixels, bits, 2, 2)).toThrowError(ShimError);
    });
});

describe('png io', () => {
    it('round trips rgb pixels', () => {
        const dir = tempDir();
        const path = join(dir, 'frame.png');
        const pixels = Buffer.from(Array.from({ length: 6 * 4 * 3 }, (_, i) => (i * 37) % 256));
        writeRgb(path, { width: 6, height: 4, pixels });
        const back = readRgb(path);
        expect(back.width).toBe(6);
        expect(back.height).toBe(4);
        expect([...back.pixels]).toEqual([...pixels]);
    });

    it('round trips a binary mask', () => {
        const dir = tempDir();
        const path = join(dir, 'mask.png');
        const bits = Uint8Array.from([1, 0, 0, 1, 1, 0]);
        writeMaskPng(path, bits, 3, 2);
        expect([...readMask(path).bits]).toEqual([...bits]);
    });

    it('rejects mask values other than 0 and 255', () => {
        const dir = tempDir();
        const path = join(dir, 'mask.png');
        writeRgb(path, { width: 2, height: 1, pixels: Buffer.from([7, 7, 7, 0, 0, 0]) });
        expect(() => readMask(path)).toThrowError(/0 or 255/);
    });
});

describe('loadJob', () => {
    it('rejects a truncated manifest', () => {
        const dir = tempDir();
        const path = join(dir, 'job.json');
        writeFileSync(path, '{"version": "1", "branch":');
        expect(() => loadJob(path)).toThrowError(/not valid JSON/);
    });

    it('rejects a missing field', () => {
        const dir = tempDir();
        const path = join(dir, 'job.json');
        writeFileSync(path, JSON.stringify({ version: '1', branch: 'left_to_right' }));
        expect(() => loadJob(path)).toThrowError(/input_frames/);
    });

    it('rejects an unknown branch', () => {
        const dir = tempDir();
        const path = join(dir, 'job.json');
        writeFileSync(path, JSON.stringify({
            version: '1', branch: 'sideways', input_frames: 'a', mask: 'b',
            output_frames: 'c', width: 2, height: 2, frame_count: 1,
        }));
        expect(() => loadJob(path)).toThrowError(/branch/);
    });

    it('rejects a non-integer width', () => {
        const dir = tempDir();
        const path = join(dir, 'job.json');
        writeFileSync(path, JSON.stringify({
            version: '1', branch: 'left_to_right', input_frames: 'a', mask: 'b',
            output_frames: 'c', width: 2.5, height: 2, frame_count: 1,
        }));
        expect(() => loadJob(path)).toThrowError(/width/);
    });
});

describe('runJob', () => {
    it('pass mode copies input frames byte for byte', () => {
        const frames = [gray(4, 3, 120), gray(4, 3, 200)];
        const masks = [new Uint8Array(12), new Uint8Array(12)];
        const dirs = writeJobDirs(frames, masks, 4, 3);
        runJob(dirs.jobPath, 'pass');
        for (let i = 0; i < 2; i++) {
            const source = readFileSync(join(dirs.inputDir, frameName(i)));
            const copy = readFileSync(join(dirs.outputDir, frameName(i)));
            expect(copy.equals(source)).toBe(true);
        }
    });

    it('fill mode writes the masked-fill result', () => {
        const pixels = Buffer.from([10, 10, 10, 0, 0, 0, 0, 0, 0, 40, 40, 40]);
        const bits = Uint8Array.from([0, 1, 1, 0]);
        const dirs = writeJobDirs([pixels], [bits], 4, 1);
        runJob(dirs.jobPath, 'fill');
        const out = readRgb(join(dirs.outputDir, frameName(0)));
        expect([...out.pixels]).toEqual([...maskedFill(pixels, bits, 4, 1)]);
    });

    it('rejects frames whose size differs from the job', () => {
        const dirs = writeJobDirs([gray(4, 3, 50)], [new Uint8Array(12)], 4, 3);
        const raw = JSON.parse(readFileSync(dirs.jobPath, 'utf-8'));
        raw.width = 9;
        writeFileSync(dirs.jobPath, JSON.stringify(raw));
        expect(() => runJob(dirs.jobPath, 'pass')).toThrowError(/4x3/);
    });

    it('rejects an unknown mode', () => {
        const dirs = writeJobDirs([gray(2, 2, 50)], [new Uint8Array(4)], 2, 2);
        expect(() => runJob(dirs.jobPath, 'paint')).toThrowError(/mode/);
    });
});

describe('run', () => {
    it('returns 0 on success and 1 on a malformed job', () => {
        const frames = [gray(2, 2, 90)];
        const dirs = writeJobDirs(frames, [new Uint8Array(4)], 2, 2);
        expect(run([dirs.jobPath])).toBe(0);
        expect(run(['--mode', 'fill', dirs.jobPath])).toBe(0);

        const bad = join(tempDir(), 'job.json');
        writeFileSync(bad, '{"version"');
        expect(run([bad])).toBe(1);
    });

    it('returns 1 without exactly one job path', () => {
        expect(run([])).toBe(1);
        expect(run(['a.json', 'b.json'])).toBe(1);
    });
});
