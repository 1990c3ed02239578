//! Deterministic placeholder images: a solid color derived from the text,
//! with the text itself drawn in a 5×7 bitmap font.

use std::io::Cursor;

use image::{ImageFormat, Rgb, RgbImage};
use sha2::{Digest, Sha256};
use unicode_normalization::char::is_combining_mark;
use unicode_normalization::UnicodeNormalization;

pub const WIDTH: u32 = 320;
pub const HEIGHT: u32 = 200;
const SCALE: u32 = 3;
const GLYPH_W: u32 = 5;
const GLYPH_H: u32 = 7;
const ADVANCE: u32 = (GLYPH_W + 1) * SCALE;
const LINE: u32 = (GLYPH_H + 3) * SCALE;

fn glyph(c: char) -> Option<[u8; 7]> {
    Some(match c {
        'A' => [0x0E, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'B' => [0x1E, 0x11, 0x11, 0x1E, 0x11, 0x11, 0x1E],
        'C' => [0x0E, 0x11, 0x10, 0x10, 0x10, 0x11, 0x0E],
        'D' => [0x1C, 0x12, 0x11, 0x11, 0x11, 0x12, 0x1C],
        'E' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x1F],
        'F' => [0x1F, 0x10, 0x10, 0x1E, 0x10, 0x10, 0x10],
        'G' => [0x0E, 0x11, 0x10, 0x17, 0x11, 0x11, 0x0F],
        'H' => [0x11, 0x11, 0x11, 0x1F, 0x11, 0x11, 0x11],
        'I' => [0x0E, 0x04, 0x04, 0x04, 0x04, 0x04, 0x0E],
        'J' => [0x07, 0x02, 0x02, 0x02, 0x02, 0x12, 0x0C],
        'K' => [0x11, 0x12, 0x14, 0x18, 0x14, 0x12, 0x11],
        'L' => [0x10, 0x10, 0x10, 0x10, 0x10, 0x10, 0x1F],
        'M' => [0x11, 0x1B, 0x15, 0x15, 0x11, 0x11, 0x11],
        'N' => [0x11, 0x11, 0x19, 0x15, 0x13, 0x11, 0x11],
        'O' => [0x0E, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'P' => [0x1E, 0x11, 0x11, 0x1E, 0x10, 0x10, 0x10],
        'Q' => [0x0E, 0x11, 0x11, 0x11, 0x15, 0x12, 0x0D],
        'R' => [0x1E, 0x11, 0x11, 0x1E, 0x14, 0x12, 0x11],
        'S' => [0x0F, 0x10, 0x10, 0x0E, 0x01, 0x01, 0x1E],
        'T' => [0x1F, 0x04, 0x04, 0x04, 0x04, 0x04, 0x04],
        'U' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x11, 0x0E],
        'V' => [0x11, 0x11, 0x11, 0x11, 0x11, 0x0A, 0x04],
        'W' => [0x11, 0x11, 0x11, 0x15, 0x15, 0x15, 0x0A],
        'X' => [0x11, 0x11, 0x0A, 0x04, 0x0A, 0x11, 0x11],
        'Y' => [0x11, 0x11, 0x11, 0x0A, 0x04, 0x04, 0x04],
        'Z' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x10, 0x1F],
        '0' => [0x0E, 0x11, 0x13, 0x15, 0x19, 0x11, 0x0E],
        '1' => [0x04, 0x0C, 0x04, 0x04, 0x04, 0x04, 0x0E],
        '2' => [0x0E, 0x11, 0x01, 0x02, 0x04, 0x08, 0x1F],
        '3' => [0x1F, 0x02, 0x04, 0x02, 0x01, 0x11, 0x0E],
        '4' => [0x02, 0x06, 0x0A, 0x12, 0x1F, 0x02, 0x02],
        '5' => [0x1F, 0x10, 0x1E, 0x01, 0x01, 0x11, 0x0E],
        '6' => [0x06, 0x08, 0x10, 0x1E, 0x11, 0x11, 0x0E],
        '7' => [0x1F, 0x01, 0x02, 0x04, 0x08, 0x08, 0x08],
        '8' => [0x0E, 0x11, 0x11, 0x0E, 0x11, 0x11, 0x0E],
        '9' => [0x0E, 0x11, 0x11, 0x0F, 0x01, 0x02, 0x0C],
        '-' => [0x00, 0x00, 0x00, 0x1F, 0x00, 0x00, 0x00],
        '\'' => [0x04, 0x04, 0x08, 0x00, 0x00, 0x00, 0x00],
        '.' => [0x00, 0x00, 0x00, 0x00, 0x00, 0x0C, 0x0C],
        ' ' => [0; 7],
        _ => return None,
    })
}

/// Uppercase ASCII rendition of `text`, accents dropped and unknown
/// characters replaced by spaces.
fn printable(text: &str) -> String {
    text.nfd()
        .filter(|c| !is_combining_mark(*c))
        .flat_map(char::to_uppercase)
        .map(|c| if glyph(c).is_some() { c } else { ' ' })
        .collect()
}

/// Greedy word wrap to `width` characters.
fn wrap(text: &str, width: usize) -> Vec<String> {
    let mut lines: Vec<String> = Vec::new();
    let mut current = String::new();
    for word in text.split_whitespace() {
        for chunk in word.as_bytes().chunks(width) {
            let chunk = std::str::from_utf8(chunk).expect("printable text is ASCII");
            if !current.is_empty() && current.len() + 1 + chunk.len() > width {
                lines.push(std::mem::take(&mut current));
            }
            if !current.is_empty() {
                current.push(' ');
            }
            current.push_str(chunk);
        }
    }
    if !current.is_empty() {
        lines.push(current);
    }
    lines
}

fn palette(text: &str) -> (Rgb<u8>, Rgb<u8>) {
    let h = Sha256::digest(text.as_bytes());
    // Muted background; keep each channel in 40..=167 so white text reads.
    let bg = Rgb([40 + h[0] % 128, 40 + h[1] % 128, 40 + h[2] % 128]);
    (bg, Rgb([245, 245, 240]))
}

/// PNG bytes of a placeholder image labelled with `text`.
pub fn render_png(text: &str) -> Vec<u8> {
    let (bg, fg) = palette(text);
    let mut img = RgbImage::from_pixel(WIDTH, HEIGHT, bg);
    let max_chars = ((WIDTH - 2 * SCALE * 4) / ADVANCE) as usize;
    let max_lines = (HEIGHT / LINE) as usize;
    let lines: Vec<String> = wrap(&printable(text), max_chars)
        .into_iter()
        .take(max_lines)
        .collect();
    let block_h = lines.len() as u32 * LINE;
    let top = HEIGHT.saturating_sub(block_h) / 2;
    for (row, line) in lines.iter().enumerate() {
        let line_w = line.len() as u32 * ADVANCE;
        let left = WIDTH.saturating_sub(line_w) / 2;
        let y0 = top + row as u32 * LINE;
        for (col, c) in line.chars().enumerate() {
            let bits = glyph(c).unwrap_or([0; 7]);
            let x0 = left + col as u32 * ADVANCE;
            for (gy, bits_row) in bits.iter().enumerate() {
                for gx in 0..GLYPH_W {
                    if bits_row & (1 << (GLYPH_W - 1 - gx)) == 0 {
                        continue;
                    }
                    for dy in 0..SCALE {
                        for dx in 0..SCALE {
                            let x = x0 + gx * SCALE + dx;
                            let y = y0 + gy as u32 * SCALE + dy;
                            if x < WIDTH && y < HEIGHT {
                                img.put_pixel(x, y, fg);
                            }
                        }
                    }
                }
            }
        }
    }
    let mut out = Cursor::new(Vec::new());
    img.write_to(&mut out, ImageFormat::Png)
        .expect("encoding an in-memory PNG cannot fail");
    out.into_inner()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_and_distinct() {
        let a = render_png("Ensaio para uma Paisagem");
        assert_eq!(a, render_png("Ensaio para uma Paisagem"));
        assert_ne!(a, render_png("Le Déjeuner sur L'Herbe"));
        assert_eq!(&a[..8], b"\x89PNG\r\n\x1a\n");
    }

    #[test]
    fn decodes_to_expected_size_with_text_pixels() {
        let png = render_png("1977");
        let img = image::load_from_memory(&png).unwrap().to_rgb8();
        assert_eq!(img.dimensions(), (WIDTH, HEIGHT));
        let (bg, fg) = palette("1977");
        assert_eq!(*img.get_pixel(0, 0), bg);
        assert!(img.pixels().any(|p| *p == fg));
    }

    #[test]
    fn text_folding_and_wrapping() {
        assert_eq!(printable("Déjeuner · x"), "DEJEUNER   X");
        assert_eq!(wrap("AAA BBB CCC", 7), ["AAA BBB", "CCC"]);
        assert_eq!(wrap("ABCDEFGHIJ", 4), ["ABCD", "EFGH", "IJ"]);
    }
}
