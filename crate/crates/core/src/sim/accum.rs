use crate::error::{Error, Result};

/// Accumulation unit: one sub-unit per systolic column, each an SPM of wide
/// accumulators with its own adder.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AccumulatorBank {
    entries: usize,
    spm: Vec<Vec<i32>>,
    /// SPM read-modify-write operations performed so far.
    accesses: u64,
}

impl AccumulatorBank {
    pub fn new(banks: usize, spm_entries: usize) -> Self {
        Self {
            entries: spm_entries,
            spm: vec![vec![0; spm_entries]; banks],
            accesses: 0,
        }
    }

    pub fn banks(&self) -> usize {
        self.spm.len()
    }

    pub fn spm_entries(&self) -> usize {
        self.entries
    }

    pub fn accesses(&self) -> u64 {
        self.accesses
    }

    fn check(&self, bank: usize, address: usize) -> Result<()> {
        if bank >= self.spm.len() {
            return Err(Error::NoSuchBank {
                bank,
                banks: self.spm.len(),
            });
        }
        if address >= self.entries {
            return Err(Error::SpmOverflow {
                bank,
                address,
                entries: self.entries,
            });
        }
        Ok(())
    }

    /// `SPM[bank][address] += partial`.
    pub fn accumulate(&mut self, bank: usize, address: usize, partial: i32) -> Result<()> {
        self.check(bank, address)?;
        self.spm[bank][address] += partial;
        self.accesses += 1;
        Ok(())
    }

    pub fn read(&self, bank: usize, address: usize) -> Result<i32> {
        self.check(bank, address)?;
        Ok(self.spm[bank][address])
    }

    /// Returns the completed value and clears the entry.
    pub fn drain(&mut self, bank: usize, address: usize) -> Result<i32> {
        self.check(bank, address)?;
        Ok(std::mem::take(&mut self.spm[bank][address]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_partial_leaves_spm_unchanged() {
        let mut acc = AccumulatorBank::new(2, 4);
        acc.accumulate(1, 3, 7).unwrap();
        acc.accumulate(1, 3, 0).unwrap();
        assert_eq!(acc.read(1, 3).unwrap(), 7);
    }

    #[test]
    fn partials_add() {
        let mut acc = AccumulatorBank::new(1, 4);
        acc.accumulate(0, 2, -5).unwrap();
        acc.accumulate(0, 2, 12).unwrap();
        assert_eq!(acc.drain(0, 2).unwrap(), 7);
        assert_eq!(acc.read(0, 2).unwrap(), 0);
        assert_eq!(acc.accesses(), 2);
    }

    #[test]
    fn overflow_is_a_hard_error() {
        let mut acc = AccumulatorBank::new(2, 4);
        assert!(matches!(
            acc.accumulate(0, 4, 1),
            Err(Error::SpmOverflow { .. })
        ));
        assert!(matches!(
            acc.accumulate(2, 0, 1),
            Err(Error::NoSuchBank { .. })
        ));
    }
}
