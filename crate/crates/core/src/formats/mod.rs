//! File codecs: Middlebury `.flo`, 8-bit PNG, line-delimited manifests, cut
//! lists and tag files, plus directory-backed frame and flow sources.

mod dir;
mod flo;
mod png;
mod text;

pub use dir::{flow_file_name, DirFlows, DirFrames};
pub use flo::{decode_flo, encode_flo, read_flo, write_flo, FLO_MAGIC};
pub use png::{read_png, write_gray8, write_mask_png, write_png};
pub use text::{
    manifest_to_string, parse_cuts, parse_manifest, parse_tags, read_cuts, read_manifest,
    read_tags, write_manifest,
};
