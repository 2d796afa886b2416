//! Standard Workload Format ingestion.
//!
//! SWF files carry `;`-prefixed header comments and one job per line with 18
//! whitespace-separated numeric fields. Field 2 is the submit time and field
//! 4 the run time; a job becomes the interval `[submit, submit + runtime)`.
//! Jobs with missing (`-1`) or non-positive run times are dropped and
//! counted, which pins the minimum kept length at one second on the archive
//! traces. Gzip-compressed input is detected by its magic bytes.

use std::io::{BufRead, BufReader, Read};
use std::path::Path;

use crate::domain::{Instance, Interval};
use crate::error::Error;
use crate::rational::{parse_exact, Rational};

const SWF_FIELDS: usize = 18;

/// A parsed trace: the usable instance plus bookkeeping about dropped jobs.
#[derive(Debug, Clone)]
pub struct SwfTrace {
    pub instance: Instance,
    /// Job lines dropped for missing or non-positive run times.
    pub dropped: usize,
    /// Total job lines seen (dropped + kept).
    pub total_jobs: usize,
}

/// Parses SWF text from any reader.
pub fn parse_swf<R: Read>(reader: R) -> Result<SwfTrace, Error> {
    let reader = BufReader::new(reader);
    let mut jobs: Vec<(Rational, Rational)> = Vec::new();
    let mut dropped = 0usize;
    let mut total = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with(';') {
            continue;
        }
        let fields: Vec<&str> = trimmed.split_whitespace().collect();
        if fields.len() != SWF_FIELDS {
            return Err(Error::MalformedLine {
                line: line_no,
                reason: format!("expected {SWF_FIELDS} fields, found {}", fields.len()),
            });
        }
        let submit = parse_exact(fields[1]).map_err(|_| Error::MalformedLine {
            line: line_no,
            reason: format!("bad submit time {:?}", fields[1]),
        })?;
        let runtime = parse_exact(fields[3]).map_err(|_| Error::MalformedLine {
            line: line_no,
            reason: format!("bad run time {:?}", fields[3]),
        })?;
        total += 1;
        if runtime <= num_traits::Zero::zero() {
            dropped += 1;
            continue;
        }
        let deadline = &submit + runtime;
        jobs.push((submit, deadline));
    }

    if jobs.is_empty() {
        return Err(Error::EmptyTrace);
    }

    // Ids are arrival ranks: sort by submit time first (stable, so equal
    // submits keep file order), then number.
    jobs.sort_by(|a, b| a.0.cmp(&b.0));
    let intervals = jobs
        .into_iter()
        .enumerate()
        .map(|(id, (release, deadline))| Interval::new(id, release, deadline))
        .collect();
    let instance = Instance::validate(intervals)?;
    Ok(SwfTrace {
        instance,
        dropped,
        total_jobs: total,
    })
}

/// Parses an SWF file, transparently inflating gzip input.
pub fn parse_swf_path(path: &Path) -> Result<SwfTrace, Error> {
    let mut file = std::fs::File::open(path)?;
    let mut magic = [0u8; 2];
    use std::io::Seek;
    let n = file.read(&mut magic)?;
    file.seek(std::io::SeekFrom::Start(0))?;
    if n == 2 && magic == [0x1f, 0x8b] {
        parse_swf(flate2::read::GzDecoder::new(file))
    } else {
        parse_swf(file)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use std::io::Cursor;

    fn job_line(job: usize, submit: i64, runtime: i64) -> String {
        let mut fields = vec!["0".to_string(); SWF_FIELDS];
        fields[0] = job.to_string();
        fields[1] = submit.to_string();
        fields[3] = runtime.to_string();
        fields.join(" ")
    }

    #[test]
    fn parses_a_tiny_trace() {
        let text = format!(
            "; Comment: synthetic fixture\n; MaxJobs: 4\n{}\n{}\n{}\n{}\n",
            job_line(1, 0, 10),
            job_line(2, 5, -1),
            job_line(3, 5, 3),
            job_line(4, 12, 0),
        );
        let trace = parse_swf(Cursor::new(text)).unwrap();
        assert_eq!(trace.total_jobs, 4);
        assert_eq!(trace.dropped, 2);
        assert_eq!(trace.instance.len(), 2);
        assert_eq!(trace.dropped + trace.instance.len(), trace.total_jobs);
        let ivs = trace.instance.intervals();
        assert_eq!(
            (ivs[0].release.clone(), ivs[0].deadline.clone()),
            (int(0), int(10))
        );
        assert_eq!(
            (ivs[1].release.clone(), ivs[1].deadline.clone()),
            (int(5), int(8))
        );
        assert_eq!(trace.instance.k(), Some(&int(10)));
    }

    #[test]
    fn rejects_malformed_lines() {
        let err = parse_swf(Cursor::new("1 2 3\n")).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 1, .. }));
        let text = format!(
            "{}\nnot a number {}\n",
            job_line(1, 0, 5),
            job_line(2, 1, 5)
        );
        let err = parse_swf(Cursor::new(text)).unwrap_err();
        assert!(matches!(err, Error::MalformedLine { line: 2, .. }));
    }

    #[test]
    fn empty_traces_are_errors() {
        assert!(matches!(
            parse_swf(Cursor::new("; only comments\n")),
            Err(Error::EmptyTrace)
        ));
        let all_dropped = job_line(1, 0, -1);
        assert!(matches!(
            parse_swf(Cursor::new(all_dropped)),
            Err(Error::EmptyTrace)
        ));
    }

    #[test]
    fn json_round_trip_is_identity() {
        let text = format!("{}\n{}\n", job_line(1, 3, 4), job_line(2, 0, 9));
        let trace = parse_swf(Cursor::new(text)).unwrap();
        let json = trace.instance.to_json();
        let back = Instance::from_json(&json).unwrap();
        assert_eq!(back, trace.instance);
    }

    #[test]
    fn gzip_input_is_detected() {
        use flate2::write::GzEncoder;
        use flate2::Compression;
        use std::io::Write;

        let text = format!("{}\n", job_line(1, 2, 7));
        let mut encoder = GzEncoder::new(Vec::new(), Compression::default());
        encoder.write_all(text.as_bytes()).unwrap();
        let gz = encoder.finish().unwrap();

        let dir = std::env::temp_dir().join(format!("augsched-swf-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let plain_path = dir.join("t.swf");
        let gz_path = dir.join("t.swf.gz");
        std::fs::write(&plain_path, &text).unwrap();
        std::fs::write(&gz_path, &gz).unwrap();

        let a = parse_swf_path(&plain_path).unwrap();
        let b = parse_swf_path(&gz_path).unwrap();
        assert_eq!(a.instance, b.instance);
        std::fs::remove_dir_all(&dir).ok();
    }
}
