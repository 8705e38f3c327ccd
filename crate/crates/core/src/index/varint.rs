//! LEB128 unsigned varints: 7 bits per byte, low bits first, high bit set on
//! every byte except the last. Postings and dictionary entries are almost
//! all small gaps, so most values fit in one byte.

/// Appends `value` to `buf` in LEB128 form.
pub fn write_u64(buf: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            buf.push(byte);
            return;
        }
        buf.push(byte | 0x80);
    }
}

/// Reads one varint from `bytes` starting at `*pos`, advancing the cursor.
/// Returns `None` on truncation or a value that does not fit in 64 bits.
pub fn read_u64(bytes: &[u8], pos: &mut usize) -> Option<u64> {
    let mut value: u64 = 0;
    let mut shift = 0u32;
    loop {
        let byte = *bytes.get(*pos)?;
        *pos += 1;
        if shift == 63 && byte > 1 {
            return None;
        }
        value |= u64::from(byte & 0x7f) << shift;
        if byte & 0x80 == 0 {
            return Some(value);
        }
        shift += 7;
        if shift > 63 {
            return None;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_boundary_values() {
        let values = [
            0u64,
            1,
            127,
            128,
            129,
            16_383,
            16_384,
            u32::MAX as u64,
            u64::MAX - 1,
            u64::MAX,
        ];
        let mut buf = Vec::new();
        for &v in &values {
            write_u64(&mut buf, v);
        }
        let mut pos = 0;
        for &v in &values {
            assert_eq!(read_u64(&buf, &mut pos), Some(v));
        }
        assert_eq!(pos, buf.len());
    }

    #[test]
    fn small_values_take_one_byte() {
        let mut buf = Vec::new();
        write_u64(&mut buf, 127);
        assert_eq!(buf.len(), 1);
        write_u64(&mut buf, 128);
        assert_eq!(buf.len(), 3);
    }

    #[test]
    fn truncated_input_reads_as_none() {
        let mut buf = Vec::new();
        write_u64(&mut buf, 300);
        let mut pos = 0;
        assert_eq!(read_u64(&buf[..1], &mut pos), None);
        // Unterminated run of continuation bytes.
        let mut pos = 0;
        assert_eq!(read_u64(&[0x80; 11], &mut pos), None);
    }
}
