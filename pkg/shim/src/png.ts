import { readFileSync, writeFileSync } from 'fs';
import { PNG } from 'pngjs';

import { ShimError } from './job';

export interface RgbImage {
    width: number;
    height: number;
    /** Interleaved RGB, 3 bytes per pixel, row major. */
    pixels: Buffer;
}

export function readRgb(path: string): RgbImage {
    let png: PNG;
    try {
        png = PNG.sync.read(readFileSync(path));
    } catch (err) {
        throw new ShimError('DecodeError', `cannot decode ${path}: ${err}`);
    }
    const pixels = Buffer.alloc(png.width * png.height * 3);
    for (let i = 0; i < png.width * png.height; i++) {
        pixels[i * 3] = png.data[i * 4];
        pixels[i * 3 + 1] = png.data[i * 4 + 1];
        pixels[i * 3 + 2] = png.data[i * 4 + 2];
    }
    return { width: png.width, height: png.height, pixels };
}

/** Read a binary mask: single-channel PNG holding only 0 or 255. */
export function readMask(path: string): { width: number; height: number; bits: Uint8Array } {
    let png: PNG;
    try {
        png = PNG.sync.read(readFileSync(path));
    } catch (err) {
        throw new ShimError('DecodeError', `cannot decode ${path}: ${err}`);
    }
    const bits = new Uint8Array(png.width * png.height);
    for (let i = 0; i < bits.length; i++) {
        const value = png.data[i * 4];
        if (value !== 0 && value !== 255) {
            throw new ShimError('DecodeError', `mask pixel must be 0 or 255, found ${value} in ${path}`);
        }
        bits[i] = value === 255 ? 1 : 0;
    }
    return { width: png.width, height: png.height, bits };
}

export function writeRgb(path: string, image: RgbImage): void {
    const png = new PNG({ width: image.width, height: image.height });
    for (let i = 0; i < image.width * image.height; i++) {
        png.data[i * 4] = image.pixels[i * 3];
        png.data[i * 4 + 1] = image.pixels[i * 3 + 1];
        png.data[i * 4 + 2] = image.pixels[i * 3 + 2];
        png.data[i * 4 + 3] = 255;
    }
    writeFileSync(path, PNG.sync.write(png, { colorType: 2 }));
}
