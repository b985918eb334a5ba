use std::io::{BufRead, Write};
use std::path::Path;

use super::PartitionError;

/// Part index of every physical element.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PartMap {
    part_of_element: Vec<usize>,
    part_count: usize,
}

impl PartMap {
    /// Validates that every part in `0..part_count` is non-empty.
    pub fn new(part_of_element: Vec<usize>, part_count: usize) -> Result<Self, PartitionError> {
        if part_count == 0 {
            return Err(PartitionError::NoParts);
        }
        let mut seen = vec![false; part_count];
        for &p in &part_of_element {
            if p >= part_count {
                return Err(PartitionError::EmptyPart(part_count));
            }
            seen[p] = true;
        }
        if let Some(p) = seen.iter().position(|s| !s) {
            return Err(PartitionError::EmptyPart(p));
        }
        Ok(PartMap { part_of_element, part_count })
    }

    /// Everything in part 0.
    pub fn single(elements: usize) -> Self {
        PartMap { part_of_element: vec![0; elements], part_count: 1 }
    }

    pub fn part_of_element(&self) -> &[usize] {
        &self.part_of_element
    }

    pub fn part_count(&self) -> usize {
        self.part_count
    }

    pub fn element_count(&self) -> usize {
        self.part_of_element.len()
    }

    pub fn part_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.part_count];
        for &p in &self.part_of_element {
            sizes[p] += 1;
        }
        sizes
    }

    /// Elements of each part, ascending.
    pub fn members(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.part_count];
        for (e, &p) in self.part_of_element.iter().enumerate() {
            out[p].push(e);
        }
        out
    }

    /// One part index per line. The part count is one more than the largest index.
    pub fn read(reader: impl BufRead) -> Result<Self, PartitionError> {
        let mut parts = Vec::new();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let text = line.trim();
            if text.is_empty() {
                continue;
            }
            let p = text
                .parse::<usize>()
                .map_err(|e| PartitionError::Parse { line: i + 1, message: format!("`{text}`: {e}") })?;
            parts.push(p);
        }
        let k = parts.iter().max().map_or(0, |m| m + 1);
        PartMap::new(parts, k)
    }

    /// Reads a map and checks it covers exactly `elements` elements.
    pub fn read_file(path: impl AsRef<Path>, elements: usize) -> Result<Self, PartitionError> {
        let map = PartMap::read(std::io::BufReader::new(std::fs::File::open(path)?))?;
        if map.element_count() != elements {
            return Err(PartitionError::Size { expected: elements, got: map.element_count() });
        }
        Ok(map)
    }

    pub fn write(&self, mut w: impl Write) -> std::io::Result<()> {
        for p in &self.part_of_element {
            writeln!(w, "{p}")?;
        }
        Ok(())
    }

    pub fn write_file(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        self.write(&mut w)?;
        w.flush()
    }
}
