//! File formats: instance JSON and CSV, tree JSON, report CSV.
//!
//! Instance JSON is `{dim, points, centers, meta: {generator, params, seed}}`
//! with `centers` possibly `null`. Tree JSON nests split nodes
//! `{dim, theta, left, right}` and leaves `{cluster, center_index}` under
//! `{ambient_dim, k, root}`. Floats are written in shortest round-trip
//! form, so thresholds survive a write/read cycle bit for bit.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::instances::{Instance, InstanceMeta};
use crate::model::{CenterSet, Node, NodeId, Point, ThresholdCut, ThresholdTree};

#[derive(Serialize, Deserialize)]
struct InstanceFile {
    dim: usize,
    points: Vec<Point>,
    centers: Option<Vec<Point>>,
    meta: InstanceMeta,
}

pub fn instance_to_json(inst: &Instance) -> Result<String> {
    let file = InstanceFile {
        dim: inst.dim,
        points: inst.points.clone(),
        centers: inst.centers.as_ref().map(|c| c.centers().to_vec()),
        meta: inst.meta.clone(),
    };
    Ok(serde_json::to_string(&file)?)
}

pub fn instance_from_json(text: &str) -> Result<Instance> {
    let file: InstanceFile = serde_json::from_str(text)?;
    let centers = file.centers.map(CenterSet::new).transpose()?;
    Instance::new(file.dim, file.points, centers, file.meta)
}

pub fn write_instance(path: &Path, inst: &Instance) -> Result<()> {
    write_text(path, &instance_to_json(inst)?)
}

pub fn read_instance(path: &Path) -> Result<Instance> {
    instance_from_json(&read_text(path)?)
}

/// One point per row, no header.
pub fn read_points_csv(path: &Path) -> Result<Vec<Point>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut points = Vec::new();
    for record in reader.records() {
        let record = record?;
        let coords = record
            .iter()
            .map(|f| f.parse::<f64>().map_err(|e| invalid(format!("{}: bad number {f:?}: {e}", path.display()))))
            .collect::<Result<Vec<f64>>>()?;
        points.push(Point::new(coords)?);
    }
    Ok(points)
}

pub fn write_points_csv(path: &Path, points: &[Point]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_path(path)?;
    for x in points {
        w.write_record(x.coords().iter().map(|v| v.to_string()))?;
    }
    w.flush()?;
    Ok(())
}

/// An instance from a points CSV and an optional centers CSV.
pub fn read_instance_csv(points: &Path, centers: Option<&Path>) -> Result<Instance> {
    let pts = read_points_csv(points)?;
    let centers = centers.map(read_points_csv).transpose()?.map(CenterSet::new).transpose()?;
    let dim = pts
        .first()
        .map(Point::dim)
        .or(centers.as_ref().map(CenterSet::dim))
        .ok_or_else(|| invalid("empty instance"))?;
    Instance::new(
        dim,
        pts,
        centers,
        InstanceMeta {
            generator: "csv".into(),
            ..Default::default()
        },
    )
}

/// Reads `.json` instances, or `.csv` points (with an optional centers file).
pub fn load_instance(path: &Path, centers: Option<&Path>) -> Result<Instance> {
    match path.extension().and_then(|e| e.to_str()) {
        Some("csv") => read_instance_csv(path, centers),
        _ => {
            let mut inst = read_instance(path)?;
            if let Some(c) = centers {
                let c = CenterSet::new(read_points_csv(c)?)?;
                crate::error::check_dim(inst.dim, c.dim())?;
                inst.centers = Some(c);
            }
            Ok(inst)
        }
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(untagged)]
enum TreeNodeJson {
    Split {
        dim: usize,
        theta: f64,
        left: Box<TreeNodeJson>,
        right: Box<TreeNodeJson>,
    },
    Leaf {
        cluster: usize,
        center_index: usize,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct TreeFile {
    ambient_dim: usize,
    k: usize,
    root: TreeNodeJson,
}

fn to_json_node(tree: &ThresholdTree, id: NodeId) -> TreeNodeJson {
    match tree.node(id) {
        Node::Split { cut, left, right } => TreeNodeJson::Split {
            dim: cut.dim,
            theta: cut.theta,
            left: Box::new(to_json_node(tree, *left)),
            right: Box::new(to_json_node(tree, *right)),
        },
        Node::Leaf { cluster, center } => TreeNodeJson::Leaf {
            cluster: *cluster,
            center_index: *center,
        },
    }
}

fn from_json_node(node: TreeNodeJson, nodes: &mut Vec<Node>) -> NodeId {
    let id = nodes.len();
    match node {
        TreeNodeJson::Leaf { cluster, center_index } => nodes.push(Node::Leaf {
            cluster,
            center: center_index,
        }),
        TreeNodeJson::Split { dim, theta, left, right } => {
            nodes.push(Node::Leaf { cluster: 0, center: 0 });
            let l = from_json_node(*left, nodes);
            let r = from_json_node(*right, nodes);
            nodes[id] = Node::Split {
                cut: ThresholdCut::new(dim, theta),
                left: l,
                right: r,
            };
        }
    }
    id
}

pub fn tree_to_json(tree: &ThresholdTree) -> Result<String> {
    let file = TreeFile {
        ambient_dim: tree.dim(),
        k: tree.k(),
        root: to_json_node(tree, tree.root()),
    };
    Ok(serde_json::to_string_pretty(&file)?)
}

pub fn tree_from_json(text: &str) -> Result<ThresholdTree> {
    let mut de = serde_json::Deserializer::from_str(text);
    de.disable_recursion_limit();
    let file = TreeFile::deserialize(&mut de)?;
    de.end()?;
    let mut nodes = Vec::new();
    let root = from_json_node(file.root, &mut nodes);
    let tree = ThresholdTree::from_nodes(nodes, root, file.ambient_dim)?;
    if tree.k() != file.k {
        return Err(invalid(format!("tree file claims k = {} but has {} leaves", file.k, tree.k())));
    }
    Ok(tree)
}

pub fn write_tree(path: &Path, tree: &ThresholdTree) -> Result<()> {
    write_text(path, &tree_to_json(tree)?)
}

pub fn read_tree(path: &Path) -> Result<ThresholdTree> {
    tree_from_json(&read_text(path)?)
}

fn read_text(path: &Path) -> Result<String> {
    let mut s = String::new();
    BufReader::new(File::open(path)?).read_to_string(&mut s)?;
    Ok(s)
}

fn write_text(path: &Path, text: &str) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(text.as_bytes())?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}
