use std::collections::BTreeMap;

use crate::bits::{Bits, BitsRef};

/// A partially known bit string: `valid[k]` says whether bit `k` has been
/// written.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Buffer {
    data: Bits,
    valid: Bits,
}

impl Buffer {
    pub fn full(bits: &BitsRef) -> Self {
        Buffer {
            data: bits.to_bitvec(),
            valid: Bits::repeat(true, bits.len()),
        }
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn write(&mut self, offset: usize, bits: &BitsRef) {
        let end = offset + bits.len();
        if self.data.len() < end {
            self.data.resize(end, false);
            self.valid.resize(end, false);
        }
        self.data[offset..end].copy_from_bitslice(bits);
        self.valid[offset..end].fill(true);
    }

    /// The bits `offset..offset+len`, or `None` if any of them is unknown.
    pub fn read(&self, offset: usize, len: usize) -> Option<Bits> {
        let end = offset + len;
        (end <= self.data.len() && self.valid[offset..end].all()).then(|| self.data[offset..end].to_bitvec())
    }

    /// The whole buffer if every bit is known.
    pub fn contents(&self) -> Option<Bits> {
        self.read(0, self.data.len())
    }
}

/// Named files held by one node.
pub type Store = BTreeMap<String, Buffer>;

/// One FW as recorded in the cloud's write ledger.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WriteRecord {
    pub round: u32,
    pub file: String,
    pub offset: u64,
    pub len: u64,
    pub writer: usize,
}

/// Passive storage of a cloud node.
#[derive(Clone, Debug, Default)]
pub struct CloudStore {
    pub files: Store,
    pub ledger: Vec<WriteRecord>,
}

impl CloudStore {
    pub fn file(&self, name: &str) -> Option<Bits> {
        self.files.get(name).and_then(Buffer::contents)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use bitvec::prelude::*;

    #[test]
    fn partial_writes() {
        let mut b = Buffer::default();
        b.write(2, bits![u8, Lsb0; 1, 0]);
        assert_eq!(b.len(), 4);
        assert!(b.read(0, 2).is_none());
        assert_eq!(b.read(2, 2).unwrap(), bitvec![u8, Lsb0; 1, 0]);
        assert!(b.contents().is_none());
        b.write(0, bits![u8, Lsb0; 1, 1]);
        assert_eq!(b.contents().unwrap(), bitvec![u8, Lsb0; 1, 1, 1, 0]);
    }
}
