use std::path::{Path, PathBuf};

use super::write_file;
use crate::error::{Error, Result};
use crate::texture::TextureSet;

/// Decoded 8-bit image, rows top to bottom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Image {
    pub width: u32,
    pub height: u32,
    pub channels: u8,
    pub data: Vec<u8>,
}

fn encode(width: u32, height: u32, channels: u8, data: &[u8]) -> std::result::Result<Vec<u8>, png::EncodingError> {
    let mut out = Vec::new();
    {
        let mut enc = png::Encoder::new(&mut out, width, height);
        enc.set_color(if channels == 3 { png::ColorType::Rgb } else { png::ColorType::Grayscale });
        enc.set_depth(png::BitDepth::Eight);
        enc.set_compression(png::Compression::Fast);
        let mut w = enc.write_header()?;
        w.write_image_data(data)?;
        w.finish()?;
    }
    Ok(out)
}

/// Writes an 8-bit RGB (`channels == 3`) or grayscale (`channels == 1`) PNG.
pub fn write_png(path: &Path, width: u32, height: u32, channels: u8, data: &[u8]) -> Result<()> {
    if !matches!(channels, 1 | 3) || data.len() != (width * height) as usize * channels as usize {
        return Err(Error::Contract(format!(
            "{} bytes do not form a {width}x{height} image with {channels} channels",
            data.len()
        )));
    }
    let bytes = encode(width, height, channels, data).map_err(|e| Error::io(path, std::io::Error::other(e)))?;
    write_file(path, &bytes)
}

pub fn read_png(path: &Path) -> Result<Image> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let parse = |message: String| Error::Parse {
        path: path.display().to_string(),
        message,
    };
    let mut reader = png::Decoder::new(std::io::BufReader::new(file))
        .read_info()
        .map_err(|e| parse(e.to_string()))?;
    let mut data = vec![0; reader.output_buffer_size().ok_or_else(|| parse("image too large".into()))?];
    let info = reader.next_frame(&mut data).map_err(|e| parse(e.to_string()))?;
    if info.bit_depth != png::BitDepth::Eight {
        return Err(parse("only 8-bit images are supported".into()));
    }
    let channels = match info.color_type {
        png::ColorType::Rgb => 3,
        png::ColorType::Grayscale => 1,
        png::ColorType::Rgba => 4,
        png::ColorType::GrayscaleAlpha => 2,
        png::ColorType::Indexed => return Err(parse("indexed images are not supported".into())),
    };
    data.truncate(info.buffer_size());
    Ok(Image {
        width: info.width,
        height: info.height,
        channels,
        data,
    })
}

/// Writes `<stem>_color.png`, `<stem>_normal.png` and `<stem>_roughness.png`.
pub fn write_texture_set(dir: &Path, stem: &str, set: &TextureSet) -> Result<Vec<PathBuf>> {
    let r = set.resolution;
    [("color", 3, &set.color), ("normal", 3, &set.normal), ("roughness", 1, &set.roughness)]
        .into_iter()
        .map(|(kind, ch, data)| {
            let path = dir.join(format!("{stem}_{kind}.png"));
            write_png(&path, r, r, ch, data)?;
            Ok(path)
        })
        .collect()
}
