//! Readers for PGM images and CSV value lists or distance matrices.

use std::io::Read;

use thiserror::Error;

use super::image::ImageSegmentation;

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("bad PGM: {0}")]
    Pgm(String),
    #[error("bad CSV: {0}")]
    Csv(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn pgm_err(msg: impl Into<String>) -> IngestError {
    IngestError::Pgm(msg.into())
}

/// Splits the PGM header into tokens, honoring `#` comments, and returns
/// the offset just past the single whitespace byte that ends the header.
fn pgm_header(data: &[u8], count: usize) -> Result<(Vec<String>, usize), IngestError> {
    let mut toks = Vec::new();
    let mut pos = 0;
    while toks.len() < count {
        while pos < data.len() && data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if pos < data.len() && data[pos] == b'#' {
            while pos < data.len() && data[pos] != b'\n' {
                pos += 1;
            }
            continue;
        }
        let start = pos;
        while pos < data.len() && !data[pos].is_ascii_whitespace() {
            pos += 1;
        }
        if start == pos {
            return Err(pgm_err("truncated header"));
        }
        toks.push(String::from_utf8_lossy(&data[start..pos]).into_owned());
    }
    Ok((toks, pos + 1))
}

fn header_num(tok: &str, what: &str) -> Result<usize, IngestError> {
    tok.parse().map_err(|_| pgm_err(format!("invalid {what} `{tok}`")))
}

/// Parses a plain (P2) or binary (P5) graymap.
pub fn parse_pgm(data: &[u8]) -> Result<ImageSegmentation, IngestError> {
    let (head, body) = pgm_header(data, 4)?;
    let width = header_num(&head[1], "width")?;
    let height = header_num(&head[2], "height")?;
    let maxval = header_num(&head[3], "maxval")?;
    if maxval == 0 || maxval > 65535 {
        return Err(pgm_err(format!("maxval {maxval} out of range")));
    }
    let count = width * height;
    let pixels: Vec<u32> = match head[0].as_str() {
        "P2" => {
            let rest = String::from_utf8_lossy(data.get(body.min(data.len())..).unwrap_or_default());
            rest.lines()
                .map(|l| l.split('#').next().unwrap_or(""))
                .flat_map(str::split_whitespace)
                .map(|t| t.parse().map_err(|_| pgm_err(format!("invalid pixel `{t}`"))))
                .collect::<Result<_, _>>()?
        }
        "P5" => {
            let raw = data.get(body..).ok_or_else(|| pgm_err("missing raster"))?;
            if maxval < 256 {
                raw.iter().take(count).map(|&b| b as u32).collect()
            } else {
                raw.chunks_exact(2)
                    .take(count)
                    .map(|c| u16::from_be_bytes([c[0], c[1]]) as u32)
                    .collect()
            }
        }
        other => return Err(pgm_err(format!("unsupported magic `{other}`"))),
    };
    if pixels.len() < count {
        return Err(pgm_err(format!("expected {count} pixels, got {}", pixels.len())));
    }
    ImageSegmentation::new(width, height, maxval as u32, pixels[..count].to_vec())
        .map_err(|e| pgm_err(e.to_string()))
}

pub fn read_pgm<R: Read>(mut reader: R) -> Result<ImageSegmentation, IngestError> {
    let mut data = Vec::new();
    reader.read_to_end(&mut data)?;
    parse_pgm(&data)
}

fn csv_rows<R: Read>(reader: R) -> Result<Vec<Vec<String>>, IngestError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| IngestError::Csv(e.to_string()))?;
        let row: Vec<String> = rec.iter().filter(|f| !f.is_empty()).map(str::to_owned).collect();
        if !row.is_empty() {
            rows.push(row);
        }
    }
    Ok(rows)
}

fn csv_num(tok: &str) -> Result<u64, IngestError> {
    tok.parse()
        .map_err(|_| IngestError::Csv(format!("invalid number `{tok}`")))
}

/// Asset values, one or more per line.
pub fn read_values_csv<R: Read>(reader: R) -> Result<Vec<u64>, IngestError> {
    csv_rows(reader)?
        .iter()
        .flatten()
        .map(|t| csv_num(t))
        .collect()
}

/// A square distance matrix, one row per line.
pub fn read_matrix_csv<R: Read>(reader: R) -> Result<Vec<Vec<u64>>, IngestError> {
    let rows: Vec<Vec<u64>> = csv_rows(reader)?
        .iter()
        .map(|r| r.iter().map(|t| csv_num(t)).collect())
        .collect::<Result<_, _>>()?;
    let n = rows.len();
    if rows.iter().any(|r| r.len() != n) {
        return Err(IngestError::Csv(format!("matrix with {n} rows is not square")));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plain_pgm() {
        let img = parse_pgm(b"P2\n# c\n3 2\n255\n0 10 20\n30 40 255\n").unwrap();
        assert_eq!((img.width, img.height, img.maxval), (3, 2, 255));
        assert_eq!(img.pixels, vec![0, 10, 20, 30, 40, 255]);
    }

    #[test]
    fn binary_pgm() {
        let mut data = b"P5 2 2 255\n".to_vec();
        data.extend([1, 2, 3, 200]);
        assert_eq!(parse_pgm(&data).unwrap().pixels, vec![1, 2, 3, 200]);
        let mut wide = b"P5 1 2 1000\n".to_vec();
        wide.extend([0x03, 0xe8, 0x00, 0x07]);
        assert_eq!(parse_pgm(&wide).unwrap().pixels, vec![1000, 7]);
    }

    #[test]
    fn pgm_errors() {
        assert!(parse_pgm(b"P6 1 1 255\n\0\0\0").is_err());
        assert!(parse_pgm(b"P2 2 2 255\n1 2 3\n").is_err());
        assert!(parse_pgm(b"P2 2").is_err());
    }

    #[test]
    fn csv_inputs() {
        assert_eq!(read_values_csv("3, 1\n# skip\n2\n".as_bytes()).unwrap(), vec![3, 1, 2]);
        let m = read_matrix_csv("0,7\n7,0\n".as_bytes()).unwrap();
        assert_eq!(m, vec![vec![0, 7], vec![7, 0]]);
        assert!(read_matrix_csv("0,7\n7\n".as_bytes()).is_err());
        assert!(read_values_csv("x\n".as_bytes()).is_err());
    }
}
