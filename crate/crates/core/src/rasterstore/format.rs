//! Single-patch container format, magic "RSP1".
//!
//! Layout (little-endian):
//!   magic "RSP1"               4 bytes
//!   version        u16         = 1
//!   n_bands        u16
//!   height         u16
//!   width          u16
//!   flags          u8          bit0: has label_map, bit1: has class_label
//!   band records   n_bands x { band_id u16, modality u8, resolution_m u16 }
//!   class_label    u16         (only if flags bit1)
//!   pixel payload  f32 x (n_bands * height * width), band-major
//!   label_map      u16 x (height * width), row-major (only if flags bit0)

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{BandMeta, Modality, RasterPatch};
use crate::error::{Error, Result};

const MAGIC: &[u8; 4] = b"RSP1";
const VERSION: u16 = 1;

pub fn write_patch(patch: &RasterPatch, path: &Path) -> Result<()> {
    patch.validate()?;
    for dim in [patch.n_bands(), patch.height, patch.width] {
        if dim == 0 || dim > u16::MAX as usize {
            return Err(Error::shape(format!("dimension {dim} out of u16 range")));
        }
    }
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(MAGIC)?;
    w.write_all(&VERSION.to_le_bytes())?;
    w.write_all(&(patch.n_bands() as u16).to_le_bytes())?;
    w.write_all(&(patch.height as u16).to_le_bytes())?;
    w.write_all(&(patch.width as u16).to_le_bytes())?;
    let mut flags = 0u8;
    if patch.label_map.is_some() {
        flags |= 1;
    }
    if patch.class_label.is_some() {
        flags |= 2;
    }
    w.write_all(&[flags])?;
    for b in &patch.bands {
        w.write_all(&b.band_id.to_le_bytes())?;
        w.write_all(&[b.modality.code()])?;
        w.write_all(&b.nominal_resolution_m.to_le_bytes())?;
    }
    if let Some(c) = patch.class_label {
        w.write_all(&c.to_le_bytes())?;
    }
    for v in &patch.data {
        w.write_all(&v.to_le_bytes())?;
    }
    if let Some(lm) = &patch.label_map {
        for v in lm {
            w.write_all(&v.to_le_bytes())?;
        }
    }
    w.flush()?;
    Ok(())
}

/// Reader that tracks its byte offset so format errors can name it.
struct Cursor<R> {
    inner: R,
    offset: u64,
}

impl<R: Read> Cursor<R> {
    fn take(&mut self, buf: &mut [u8]) -> Result<()> {
        let start = self.offset;
        let mut filled = 0;
        while filled < buf.len() {
            let n = self.inner.read(&mut buf[filled..])?;
            if n == 0 {
                return Err(Error::format(
                    start + filled as u64,
                    format!("truncated: expected {} more bytes", buf.len() - filled),
                ));
            }
            filled += n;
            self.offset += n as u64;
        }
        Ok(())
    }

    fn u8(&mut self) -> Result<u8> {
        let mut b = [0u8; 1];
        self.take(&mut b)?;
        Ok(b[0])
    }

    fn u16(&mut self) -> Result<u16> {
        let mut b = [0u8; 2];
        self.take(&mut b)?;
        Ok(u16::from_le_bytes(b))
    }
}

pub fn read_patch(path: &Path) -> Result<RasterPatch> {
    let mut r = Cursor {
        inner: BufReader::new(File::open(path)?),
        offset: 0,
    };
    let mut magic = [0u8; 4];
    r.take(&mut magic)?;
    if &magic != MAGIC {
        return Err(Error::format(
            0,
            format!("bad magic {:?}, expected \"RSP1\"", String::from_utf8_lossy(&magic)),
        ));
    }
    let version = r.u16()?;
    if version != VERSION {
        return Err(Error::format(4, format!("unsupported version {version}")));
    }
    let n_bands = r.u16()? as usize;
    let height = r.u16()? as usize;
    let width = r.u16()? as usize;
    if n_bands == 0 || height == 0 || width == 0 {
        return Err(Error::format(6, "zero-sized patch".to_string()));
    }
    let flags = r.u8()?;
    if flags & !0b11 != 0 {
        return Err(Error::format(12, format!("unknown flag bits {flags:#04x}")));
    }

    let mut bands = Vec::with_capacity(n_bands);
    for _ in 0..n_bands {
        let band_id = r.u16()?;
        let code_off = r.offset;
        let code = r.u8()?;
        let modality = Modality::from_code(code)
            .ok_or_else(|| Error::format(code_off, format!("unknown modality code {code}")))?;
        let nominal_resolution_m = r.u16()?;
        bands.push(BandMeta {
            band_id,
            modality,
            nominal_resolution_m,
        });
    }

    let class_label = if flags & 2 != 0 { Some(r.u16()?) } else { None };

    let n_px = n_bands * height * width;
    let payload_start = r.offset;
    let mut raw = vec![0u8; n_px * 4];
    r.take(&mut raw)?;
    let mut data = Vec::with_capacity(n_px);
    for (i, chunk) in raw.chunks_exact(4).enumerate() {
        let v = f32::from_le_bytes([chunk[0], chunk[1], chunk[2], chunk[3]]);
        if !v.is_finite() {
            return Err(Error::format(
                payload_start + (i as u64) * 4,
                format!("non-finite pixel value {v}"),
            ));
        }
        data.push(v);
    }

    let label_map = if flags & 1 != 0 {
        let mut raw = vec![0u8; height * width * 2];
        r.take(&mut raw)?;
        Some(
            raw.chunks_exact(2)
                .map(|c| u16::from_le_bytes([c[0], c[1]]))
                .collect(),
        )
    } else {
        None
    };

    // Trailing garbage is a container violation too.
    let mut probe = [0u8; 1];
    if r.inner.read(&mut probe)? != 0 {
        return Err(Error::format(r.offset, "trailing bytes after payload".to_string()));
    }

    let patch = RasterPatch {
        bands,
        height,
        width,
        data,
        label_map,
        class_label,
    };
    patch.validate()?;
    Ok(patch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::StreamRng;
    use proptest::prelude::*;

    fn tiny_patch() -> RasterPatch {
        RasterPatch {
            bands: vec![BandMeta {
                band_id: 0,
                modality: Modality::Ms,
                nominal_resolution_m: 10,
            }],
            height: 1,
            width: 1,
            data: vec![0.5],
            label_map: None,
            class_label: None,
        }
    }

    #[test]
    fn roundtrip_tiny() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.rsp");
        let p = tiny_patch();
        write_patch(&p, &path).unwrap();
        let q = read_patch(&path).unwrap();
        assert_eq!(p, q);
    }

    #[test]
    fn file_size_matches_layout() {
        // header 13 + one band record 5 + one f32 payload 4
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.rsp");
        write_patch(&tiny_patch(), &path).unwrap();
        let len = std::fs::metadata(&path).unwrap().len();
        assert_eq!(len, 13 + 5 + 4);
    }

    #[test]
    fn bad_magic_is_a_format_error_at_offset_zero() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.rsp");
        write_patch(&tiny_patch(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0..4].copy_from_slice(b"XXXX");
        std::fs::write(&path, &bytes).unwrap();
        match read_patch(&path) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 0),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn truncation_names_the_offset() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.rsp");
        write_patch(&tiny_patch(), &path).unwrap();
        let bytes = std::fs::read(&path).unwrap();
        std::fs::write(&path, &bytes[..bytes.len() - 2]).unwrap();
        match read_patch(&path) {
            Err(Error::Format { offset, msg }) => {
                assert!(offset >= 18, "offset {offset} msg {msg}");
            }
            other => panic!("expected format error, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_payload_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.rsp");
        write_patch(&tiny_patch(), &path).unwrap();
        let mut bytes = std::fs::read(&path).unwrap();
        let n = bytes.len();
        bytes[n - 4..].copy_from_slice(&f32::NAN.to_le_bytes());
        std::fs::write(&path, &bytes).unwrap();
        match read_patch(&path) {
            Err(Error::Format { offset, .. }) => assert_eq!(offset, 18),
            other => panic!("expected format error, got {other:?}"),
        }
    }

    fn random_patch(rng: &mut StreamRng) -> RasterPatch {
        let n_ms = 1 + rng.index(4);
        let n_sar = rng.index(3);
        let h = 1 + rng.index(9);
        let w = 1 + rng.index(9);
        let n_bands = n_ms + n_sar;
        let mut bands = Vec::new();
        for i in 0..n_bands {
            bands.push(BandMeta {
                band_id: i as u16,
                modality: if i < n_ms { Modality::Ms } else { Modality::Sar },
                nominal_resolution_m: if i < n_ms { 20 } else { 10 },
            });
        }
        let data = (0..n_bands * h * w)
            .map(|_| rng.range_f32(-10.0, 10.0))
            .collect();
        let label_map = if rng.bernoulli(0.5) {
            Some((0..h * w).map(|_| rng.index(5) as u16).collect())
        } else {
            None
        };
        let class_label = if rng.bernoulli(0.5) {
            Some(rng.index(5) as u16)
        } else {
            None
        };
        RasterPatch {
            bands,
            height: h,
            width: w,
            data,
            label_map,
            class_label,
        }
    }

    #[test]
    fn roundtrip_many_random_patches() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("p.rsp");
        let mut rng = StreamRng::new(123);
        for _ in 0..200 {
            let p = random_patch(&mut rng);
            write_patch(&p, &path).unwrap();
            let q = read_patch(&path).unwrap();
            assert_eq!(p, q);
        }
    }

    proptest! {
        #[test]
        fn roundtrip_bytes_are_stable(seed in 0u64..1000) {
            let dir = tempfile::tempdir().unwrap();
            let a = dir.path().join("a.rsp");
            let b = dir.path().join("b.rsp");
            let mut rng = StreamRng::new(seed);
            let p = random_patch(&mut rng);
            write_patch(&p, &a).unwrap();
            let q = read_patch(&a).unwrap();
            write_patch(&q, &b).unwrap();
            prop_assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        }
    }
}
