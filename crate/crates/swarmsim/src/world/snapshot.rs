//! Line-oriented text snapshots of a world.
//!
//! Format, one record per line, space-separated:
//!
//! ```text
//! swarmsim-world v1
//! world <width> <height> <round>
//! node <id> <x> <y> <z>
//! tag world <key> <type> <value>
//! tag node <id> <key> <type> <value>
//! ```
//!
//! `<type>` is one of int, real, str, bool. Reals are written with full
//! round-trip precision in decimal notation. Strings (and keys) are
//! percent-encoded: space -> %20, percent -> %25, newline -> %0A. Only
//! persistent tags are written; volatile tags and pending events are not
//! part of a snapshot.

use std::io::{self, BufRead, Write};

use thiserror::Error;

use crate::models::ModelSet;
use crate::world::node::{Node, NodeId, Position, Topology};
use crate::world::tags::TagValue;
use crate::world::World;

const HEADER: &str = "swarmsim-world v1";
const MAGIC: &str = "swarmsim-world";

#[derive(Debug, Error)]
pub enum SnapshotError {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },
    #[error("unsupported snapshot version {found:?}")]
    VersionMismatch { found: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

fn parse_err(line: usize, reason: impl Into<String>) -> SnapshotError {
    SnapshotError::Parse {
        line,
        reason: reason.into(),
    }
}

pub(crate) fn percent_encode(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '%' => out.push_str("%25"),
            ' ' => out.push_str("%20"),
            '\n' => out.push_str("%0A"),
            other => out.push(other),
        }
    }
    out
}

pub(crate) fn percent_decode(s: &str) -> Result<String, String> {
    let mut out = String::with_capacity(s.len());
    let bytes = s.as_bytes();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i] == b'%' {
            let code = bytes.get(i + 1..i + 3).ok_or("truncated percent escape")?;
            match code {
                b"20" => out.push(' '),
                b"25" => out.push('%'),
                b"0A" => out.push('\n'),
                other => {
                    return Err(format!(
                        "unknown percent escape %{}",
                        String::from_utf8_lossy(other)
                    ))
                }
            }
            i += 3;
        } else {
            let c = s[i..].chars().next().expect("in-bounds char");
            out.push(c);
            i += c.len_utf8();
        }
    }
    Ok(out)
}

fn write_tag_value(value: &TagValue) -> (&'static str, String) {
    match value {
        TagValue::Int(v) => ("int", v.to_string()),
        TagValue::Real(v) => ("real", v.to_string()),
        TagValue::Str(v) => ("str", percent_encode(v)),
        TagValue::Bool(v) => ("bool", v.to_string()),
    }
}

fn read_tag_value(line: usize, type_name: &str, raw: &str) -> Result<TagValue, SnapshotError> {
    match type_name {
        "int" => raw
            .parse()
            .map(TagValue::Int)
            .map_err(|_| parse_err(line, format!("bad int value {raw:?}"))),
        "real" => raw
            .parse()
            .map(TagValue::Real)
            .map_err(|_| parse_err(line, format!("bad real value {raw:?}"))),
        "str" => percent_decode(raw)
            .map(TagValue::Str)
            .map_err(|e| parse_err(line, e)),
        "bool" => match raw {
            "true" => Ok(TagValue::Bool(true)),
            "false" => Ok(TagValue::Bool(false)),
            _ => Err(parse_err(line, format!("bad bool value {raw:?}"))),
        },
        other => Err(parse_err(line, format!("unknown tag type {other:?}"))),
    }
}

impl World {
    /// Writes a textual snapshot: size hint, round, node positions, and all
    /// persistent tags.
    pub fn save_snapshot<W: Write>(&self, mut sink: W) -> io::Result<()> {
        writeln!(sink, "{HEADER}")?;
        let (width, height) = self.size_hint();
        writeln!(sink, "world {} {} {}", width, height, self.round())?;
        for node in self.nodes() {
            let p = node.position();
            writeln!(sink, "node {} {} {} {}", node.id(), p.x, p.y, p.z)?;
        }
        for (key, value) in self.global_tags().persistent_entries() {
            let (type_name, encoded) = write_tag_value(value);
            writeln!(
                sink,
                "tag world {} {} {}",
                percent_encode(key),
                type_name,
                encoded
            )?;
        }
        for node in self.nodes() {
            for (key, value) in node.tags().persistent_entries() {
                let (type_name, encoded) = write_tag_value(value);
                writeln!(
                    sink,
                    "tag node {} {} {} {}",
                    node.id(),
                    percent_encode(key),
                    type_name,
                    encoded
                )?;
            }
        }
        Ok(())
    }

    /// Reconstructs a world from a snapshot produced by
    /// [`save_snapshot`](Self::save_snapshot), binding it to `models`.
    /// Loaded tags are all persistent; processors are not part of snapshots
    /// and must be re-attached by the caller.
    pub fn load_snapshot<R: BufRead>(source: R, models: ModelSet) -> Result<World, SnapshotError> {
        let mut lines = source.lines().enumerate();

        let (_, header) = lines.next().ok_or_else(|| parse_err(1, "empty snapshot"))?;
        let header = header?;
        if header != HEADER {
            return if let Some(version) = header.strip_prefix(MAGIC) {
                Err(SnapshotError::VersionMismatch {
                    found: version.trim().to_string(),
                })
            } else {
                Err(parse_err(1, "missing snapshot header"))
            };
        }

        let (_, world_line) = lines
            .next()
            .ok_or_else(|| parse_err(2, "missing world record"))?;
        let world_line = world_line?;
        let fields: Vec<&str> = world_line.split(' ').collect();
        if fields.len() != 4 || fields[0] != "world" {
            return Err(parse_err(2, "expected `world <width> <height> <round>`"));
        }
        let width: f64 = fields[1]
            .parse()
            .map_err(|_| parse_err(2, "bad world width"))?;
        let height: f64 = fields[2]
            .parse()
            .map_err(|_| parse_err(2, "bad world height"))?;
        let round: u64 = fields[3]
            .parse()
            .map_err(|_| parse_err(2, "bad world round"))?;

        let mut topology = Topology::new((width, height));
        let mut world_tags: Vec<(String, TagValue)> = Vec::new();
        let mut node_tags: Vec<(usize, u32, String, TagValue)> = Vec::new();

        for (index, line) in lines {
            let line_no = index + 1;
            let line = line?;
            let mut parts = line.splitn(2, ' ');
            let record = parts.next().unwrap_or("");
            let rest = parts.next().unwrap_or("");
            match record {
                "node" => {
                    let fields: Vec<&str> = rest.split(' ').collect();
                    if fields.len() != 4 {
                        return Err(parse_err(line_no, "expected `node <id> <x> <y> <z>`"));
                    }
                    let id: u32 = fields[0]
                        .parse()
                        .map_err(|_| parse_err(line_no, "bad node id"))?;
                    if id as usize != topology.len() {
                        return Err(parse_err(
                            line_no,
                            format!("non-dense node id {id}, expected {}", topology.len()),
                        ));
                    }
                    let coord = |i: usize, name: &str| -> Result<f64, SnapshotError> {
                        fields[i]
                            .parse()
                            .map_err(|_| parse_err(line_no, format!("bad node {name}")))
                    };
                    let position = Position::new(coord(1, "x")?, coord(2, "y")?, coord(3, "z")?);
                    topology.push(Node::new(NodeId::new(id), position));
                }
                "tag" => {
                    let mut parts = rest.splitn(2, ' ');
                    let scope = parts.next().unwrap_or("");
                    let rest = parts.next().unwrap_or("");
                    match scope {
                        "world" => {
                            let fields: Vec<&str> = rest.splitn(3, ' ').collect();
                            if fields.len() != 3 {
                                return Err(parse_err(
                                    line_no,
                                    "expected `tag world <key> <type> <value>`",
                                ));
                            }
                            let key =
                                percent_decode(fields[0]).map_err(|e| parse_err(line_no, e))?;
                            let value = read_tag_value(line_no, fields[1], fields[2])?;
                            world_tags.push((key, value));
                        }
                        "node" => {
                            let fields: Vec<&str> = rest.splitn(4, ' ').collect();
                            if fields.len() != 4 {
                                return Err(parse_err(
                                    line_no,
                                    "expected `tag node <id> <key> <type> <value>`",
                                ));
                            }
                            let id: u32 = fields[0]
                                .parse()
                                .map_err(|_| parse_err(line_no, "bad node id"))?;
                            let key =
                                percent_decode(fields[1]).map_err(|e| parse_err(line_no, e))?;
                            let value = read_tag_value(line_no, fields[2], fields[3])?;
                            node_tags.push((line_no, id, key, value));
                        }
                        other => {
                            return Err(parse_err(line_no, format!("unknown tag scope {other:?}")))
                        }
                    }
                }
                "" => return Err(parse_err(line_no, "empty record")),
                other => return Err(parse_err(line_no, format!("unknown record type {other:?}"))),
            }
        }

        let mut world = World::from_parts(models, topology, round);
        for (key, value) in world_tags {
            world.global_tags_mut().set(key, value, true);
        }
        for (line_no, id, key, value) in node_tags {
            world
                .set_node_tag(NodeId::new(id), key, value, true)
                .map_err(|_| parse_err(line_no, format!("tag for unknown node {id}")))?;
        }
        Ok(world)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::models::ModelSet;

    fn world_with(nodes: &[(f64, f64)]) -> World {
        let mut w = World::new(ModelSet::defaults(0), (10.0, 10.0));
        for &(x, y) in nodes {
            w.add_node(Position::planar(x, y), vec![]).unwrap();
        }
        w
    }

    fn save(world: &World) -> String {
        let mut buf = Vec::new();
        world.save_snapshot(&mut buf).unwrap();
        String::from_utf8(buf).unwrap()
    }

    fn load(text: &str) -> Result<World, SnapshotError> {
        World::load_snapshot(text.as_bytes(), ModelSet::defaults(0))
    }

    #[test]
    fn empty_world_round_trip() {
        let world = world_with(&[]);
        let restored = load(&save(&world)).unwrap();
        assert_eq!(restored.node_count(), 0);
        assert_eq!(restored.round(), 0);
        assert_eq!(restored.size_hint(), (10.0, 10.0));
    }

    #[test]
    fn nodes_and_persistent_tags_round_trip() {
        let mut world = world_with(&[(0.1, 0.2), (3.0, 4.0), (5.5, 6.25), (7.0, 8.0), (9.9, 0.5)]);
        for i in 0..5 {
            world
                .set_node_tag(NodeId::new(i), "hops", TagValue::Int(i as i64), true)
                .unwrap();
        }
        let restored = load(&save(&world)).unwrap();
        assert_eq!(restored.node_count(), 5);
        for i in 0..5 {
            let id = NodeId::new(i);
            assert_eq!(
                restored.node(id).unwrap().position(),
                world.node(id).unwrap().position()
            );
            assert_eq!(
                restored.node_tag(id, "hops").unwrap(),
                Some(&TagValue::Int(i as i64))
            );
        }
    }

    #[test]
    fn volatile_tags_do_not_survive() {
        let mut world = world_with(&[(1.0, 1.0)]);
        world
            .global_tags_mut()
            .set("volatile", TagValue::Bool(true), false);
        world
            .global_tags_mut()
            .set("durable", TagValue::Bool(true), true);
        world
            .set_node_tag(NodeId::new(0), "scratch", TagValue::Int(1), false)
            .unwrap();
        let restored = load(&save(&world)).unwrap();
        assert_eq!(restored.global_tags().get("volatile"), None);
        assert_eq!(
            restored.global_tags().get("durable"),
            Some(&TagValue::Bool(true))
        );
        assert_eq!(restored.node_tag(NodeId::new(0), "scratch").unwrap(), None);
    }

    #[test]
    fn strings_with_specials_round_trip() {
        let mut world = world_with(&[]);
        let tricky = "50% done\nnext line and spaces";
        world
            .global_tags_mut()
            .set("status note", TagValue::Str(tricky.to_string()), true);
        let restored = load(&save(&world)).unwrap();
        assert_eq!(
            restored.global_tags().get("status note"),
            Some(&TagValue::Str(tricky.to_string()))
        );
    }

    #[test]
    fn double_round_trip_is_stable() {
        let mut world = world_with(&[(0.5, 0.5), (2.0, 3.0)]);
        world.global_tags_mut().set("k", TagValue::Real(0.1), true);
        let once = save(&load(&save(&world)).unwrap());
        let twice = save(&load(&once).unwrap());
        assert_eq!(once, twice);
    }

    #[test]
    fn version_mismatch() {
        assert!(matches!(
            load("swarmsim-world v9\nworld 1 1 0\n"),
            Err(SnapshotError::VersionMismatch { found }) if found == "v9"
        ));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let err = load("swarmsim-world v1\nworld 1 1 0\nnode zero 0 0 0\n").unwrap_err();
        match err {
            SnapshotError::Parse { line, .. } => assert_eq!(line, 3),
            other => panic!("expected parse error, got {other:?}"),
        }
        let err = load("not a snapshot\n").unwrap_err();
        assert!(matches!(err, SnapshotError::Parse { line: 1, .. }));
    }

    #[test]
    fn round_is_preserved_and_marks_started() {
        let mut world = world_with(&[(1.0, 1.0)]);
        world.step_round().unwrap();
        world.step_round().unwrap();
        let restored = load(&save(&world)).unwrap();
        assert_eq!(restored.round(), 2);
        assert!(restored.started());
    }

    #[test]
    fn percent_coding_is_exact() {
        for s in ["", "plain", "a b", "100%", "a\nb", "%20", "% %% %%%"] {
            assert_eq!(percent_decode(&percent_encode(s)).unwrap(), s);
        }
        assert!(percent_decode("%ZZ").is_err());
        assert!(percent_decode("%2").is_err());
    }
}
