//! Entry-by-entry transcription of the reference 32x32 dilation matrix.
//!
//! The matrix is a 4x4 grid of system blocks. Block `(r, c)` holds the 5x5
//! formula entries at rows `|r>|a>` and columns `|c>|a'>` for ancilla values
//! `a, a' in 000..100`; diagonal blocks also carry a 3x3 identity on ancilla
//! values `101..111`, and everything else is zero.

use crate::povm::PovmParams;
use crate::tag::EntryTag;
use crate::matkernel::{CMatrix, C64};

use super::{global_index, DilationSource, DilationUnitary, DIM, SYSTEM_DIM, USED_ANCILLA};

/// `PAPER_BLOCKS[r][c][a][a']`, tags written as printed (including forms such
/// as `2q/-α`).
pub const PAPER_BLOCKS: [[[[&str; 5]; 5]; 4]; 4] = [
    [
        // system block (0, 0)
        [
            ["q/α²", "α/2y", "α/2s", "-α/2y", "u/2α"],
            ["q/α²", "α/2y", "-α/2s", "α/2y", "u/2α"],
            ["q/α²", "-α/2y", "α/2s", "α/2y", "u/2α"],
            ["q/α²", "-α/2y", "-α/2s", "-α/2y", "u/2α"],
            ["u", "0", "0", "0", "2q/-α"],
        ],
        // system block (0, 1)
        [
            ["q/αβ", "βt/2γδs", "0", "-βt/2γδs", "v/2α"],
            ["q/αβ", "βt/2γδs", "0", "βt/2γδs", "v/2α"],
            ["-q/αβ", "βt/2γδs", "0", "-βt/2γδs", "-v/2α"],
            ["-q/αβ", "βt/2γδs", "0", "βt/2γδs", "-v/2α"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (0, 2)
        [
            ["q/αγ", "δz/2βγy", "0", "-δz/2βγy", "0"],
            ["-q/αγ", "-δz/2βγy", "0", "-δz/2βγy", "0"],
            ["q/αγ", "-δz/2βγy", "0", "δz/2βγy", "0"],
            ["-q/αγ", "δz/2βγy", "0", "δz/2βγy", "0"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (0, 3)
        [
            ["q/αδ", "w/2α", "0", "α/2s", "p/2α"],
            ["-q/αδ", "-w/2α", "0", "α/2s", "-p/2α"],
            ["-q/αδ", "w/2α", "0", "α/2s", "-p/2α"],
            ["q/αδ", "-w/2α", "0", "α/2s", "p/2α"],
            ["0", "0", "0", "0", "0"],
        ],
    ],
    [
        // system block (1, 0)
        [
            ["q/αβ", "0", "-β/2s", "0", "u/2β"],
            ["q/αβ", "0", "β/2s", "0", "u/2β"],
            ["-q/αβ", "0", "β/2s", "0", "-u/2β"],
            ["-q/αβ", "0", "-β/2s", "0", "-u/2β"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (1, 1)
        [
            ["q/β²", "αt/2γδs", "β/2z", "-αt/2γδs", "v/2β"],
            ["q/β²", "αt/2γδs", "-β/2z", "αt/2γδs", "v/2β"],
            ["q/β²", "-αt/2γδs", "β/2z", "αt/2γδs", "v/2β"],
            ["q/β²", "-αt/2γδs", "-β/2z", "-αt/2γδs", "v/2β"],
            ["v", "0", "0", "0", "2q/-β"],
        ],
        // system block (1, 2)
        [
            ["q/βγ", "-γy/2αδz", "0", "γy/2αδz", "0"],
            ["-q/βγ", "γy/2αδz", "0", "γy/2αδz", "0"],
            ["-q/βγ", "-γy/2αδz", "0", "γy/2αδz", "0"],
            ["q/βγ", "γy/2αδz", "0", "γy/2αδz", "0"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (1, 3)
        [
            ["q/βδ", "w/2β", "β/2z", "-β/2s", "p/2β"],
            ["-q/βδ", "-w/2β", "β/2z", "-β/2s", "-p/2β"],
            ["q/βδ", "-w/2β", "β/2z", "β/2s", "p/2β"],
            ["-q/βδ", "w/2β", "β/2z", "β/2s", "-p/2β"],
            ["0", "0", "0", "0", "0"],
        ],
    ],
    [
        // system block (2, 0)
        [
            ["q/αγ", "0", "0", "0", "u/2γ"],
            ["-q/αγ", "0", "0", "0", "-u/2γ"],
            ["q/αγ", "0", "0", "0", "u/2γ"],
            ["-q/αγ", "0", "0", "0", "-u/2γ"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (2, 1)
        [
            ["q/βγ", "-δs/2αβt", "-γ/2z", "δs/2αβt", "v/2γ"],
            ["-q/βγ", "δs/2αβt", "-γ/2z", "δs/2αβt", "-v/2γ"],
            ["-q/βγ", "-δs/2αβt", "γ/2z", "δs/2αβt", "-v/2γ"],
            ["q/βγ", "δs/2αβt", "γ/2z", "δs/2αβt", "v/2γ"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (2, 2)
        [
            ["q/γ²", "-βy/2αδz", "γ/2t", "βy/2αδz", "γ/2t"],
            ["q/γ²", "-βy/2αδz", "-γ/2t", "-βy/2αδz", "γ/2t"],
            ["q/γ²", "βy/2αδz", "γ/2t", "-βy/2αδz", "γ/2t"],
            ["q/γ²", "βy/2αδz", "-γ/2t", "βy/2αδz", "γ/2t"],
            ["w", "0", "0", "0", "0"],
        ],
        // system block (2, 3)
        [
            ["q/γδ", "w/2γ", "-γ/2z", "0", "p/2γ"],
            ["q/γδ", "w/2γ", "γ/2z", "0", "p/2γ"],
            ["-q/γδ", "w/2γ", "γ/2z", "0", "-p/2γ"],
            ["-q/γδ", "w/2γ", "-γ/2z", "0", "-p/2γ"],
            ["0", "2q/-γ", "0", "0", "0"],
        ],
    ],
    [
        // system block (3, 0)
        [
            ["q/αδ", "-δ/2y", "0", "δ/2y", "u/2δ"],
            ["-q/αδ", "δ/2y", "0", "δ/2y", "-u/2δ"],
            ["-q/αδ", "-δ/2y", "0", "δ/2y", "-u/2δ"],
            ["q/αδ", "δ/2y", "0", "δ/2y", "u/2δ"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (3, 1)
        [
            ["q/βδ", "-γs/2αβt", "0", "γs/2αβt", "v/2δ"],
            ["-q/βδ", "γs/2αβt", "0", "γs/2αβt", "-v/2δ"],
            ["q/βδ", "γs/2αβt", "0", "-γs/2αβt", "v/2δ"],
            ["-q/βδ", "-γs/2αβt", "0", "-γs/2αβt", "-v/2δ"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (3, 2)
        [
            ["q/γδ", "αz/2βγy", "-δ/2t", "-αz/2βγy", "-δ/2t"],
            ["q/γδ", "αz/2βγy", "δ/2t", "αz/2βγy", "-δ/2t"],
            ["-q/γδ", "αz/2βγy", "δ/2t", "-αz/2βγy", "δ/2t"],
            ["-q/γδ", "αz/2βγy", "-δ/2t", "αz/2βγy", "δ/2t"],
            ["0", "0", "0", "0", "0"],
        ],
        // system block (3, 3)
        [
            ["q/δ²", "w/2δ", "0", "0", "p/2δ"],
            ["q/δ²", "w/2δ", "0", "0", "p/2δ"],
            ["q/δ²", "-w/2δ", "0", "0", "p/2δ"],
            ["q/δ²", "-w/2δ", "0", "0", "p/2δ"],
            ["p", "0", "0", "0", "2q/-δ"],
        ],
    ],];

/// Entry tags for all 1024 entries, row-major.
pub fn paper_entry_tags() -> Vec<EntryTag> {
    let mut tags = vec![EntryTag::parse("0").expect("literal zero"); DIM * DIM];
    let one = EntryTag::parse("1").expect("literal one");
    for (r, row_blocks) in PAPER_BLOCKS.iter().enumerate() {
        for (c, block) in row_blocks.iter().enumerate() {
            for (a, row) in block.iter().enumerate() {
                for (b, text) in row.iter().enumerate() {
                    tags[global_index(r, a) * DIM + global_index(c, b)] =
                        EntryTag::parse(text).expect("table tags parse");
                }
            }
        }
    }
    for s in 0..SYSTEM_DIM {
        for a in USED_ANCILLA..8 {
            let g = global_index(s, a);
            tags[g * DIM + g] = one.clone();
        }
    }
    tags
}

/// Evaluates the reference matrix at `params`. No unitarity is enforced;
/// [`super::audit_dilation`] measures it.
pub fn transcribe_paper_matrix(params: &PovmParams) -> DilationUnitary {
    let tags = paper_entry_tags();
    let matrix = CMatrix::from_fn(DIM, DIM, |i, j| C64::new(tags[i * DIM + j].eval(params), 0.0));
    DilationUnitary {
        matrix,
        source: DilationSource::PaperMatrix,
        params: *params,
        tags: Some(tags),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::povm::QChoice;

    #[test]
    fn all_tags_parse() {
        assert_eq!(paper_entry_tags().len(), 1024);
    }

    #[test]
    fn top_left_entry_is_q_over_alpha_squared() {
        let params =
            PovmParams::from_inverse_squares([0.5, 0.25, 0.125, 0.125], QChoice::Optimal).unwrap();
        let u = transcribe_paper_matrix(&params);
        let expected = params.q() / (params.alpha() * params.alpha());
        assert_eq!(u.matrix[(0, 0)].re, expected);
        assert_eq!(u.tag(0, 0).unwrap().as_str(), "q/α²");
    }

    #[test]
    fn unused_ancilla_rows_and_columns_are_identity() {
        let params = PovmParams::new(2.0, 2.0, 2.0, 2.0, 1.0).unwrap();
        let u = transcribe_paper_matrix(&params).matrix;
        for s in 0..SYSTEM_DIM {
            for a in USED_ANCILLA..8 {
                let g = global_index(s, a);
                for k in 0..DIM {
                    let want = if k == g { 1.0 } else { 0.0 };
                    assert_eq!(u[(g, k)], C64::new(want, 0.0));
                    assert_eq!(u[(k, g)], C64::new(want, 0.0));
                }
            }
        }
    }
}
