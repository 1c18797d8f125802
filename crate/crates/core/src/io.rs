//! Instance and solution files.
//!
//! An instance file is a JSON document:
//!
//! ```json
//! {
//!   "clusters": ["1", "2"],
//!   "k": 2,
//!   "m": 3,
//!   "n": 2,
//!   "objects": [
//!     {"cluster": "1", "id": "s0", "tags": [0, 2]},
//!     {"cluster": "2", "id": "s1", "tags": [1]}
//!   ],
//!   "version": 1
//! }
//! ```
//!
//! `tag_labels` (one string per tag) is optional. Objects keep their file
//! order, which fixes their dense ids. [`serialize_instance`] writes keys in
//! sorted order, tags sorted, one object per line, newline-terminated, so
//! serializing a parsed file reproduces it byte for byte.

use std::collections::{BTreeMap, HashMap};
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Instance, Solution};

pub const FORMAT_VERSION: u32 = 1;

/// An instance together with its labels.
#[derive(Clone, Debug, PartialEq)]
pub struct InstanceFile {
    pub instance: Instance,
    pub cluster_labels: Vec<String>,
    pub object_labels: Vec<String>,
    pub tag_labels: Option<Vec<String>>,
}

impl InstanceFile {
    /// Labels clusters `1..=k` and objects `s0, s1, …`.
    pub fn from_instance(instance: Instance) -> Self {
        Self {
            cluster_labels: (1..=instance.k()).map(|l| l.to_string()).collect(),
            object_labels: (0..instance.n()).map(|i| format!("s{i}")).collect(),
            tag_labels: None,
            instance,
        }
    }

    pub fn cluster_index(&self, label: &str) -> Option<usize> {
        self.cluster_labels.iter().position(|c| c == label)
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawObject {
    id: String,
    cluster: String,
    tags: Vec<i64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInstance {
    version: u32,
    n: usize,
    m: usize,
    k: usize,
    clusters: Vec<String>,
    objects: Vec<RawObject>,
    #[serde(default)]
    tag_labels: Option<Vec<String>>,
}

fn json_error(e: serde_json::Error) -> Error {
    Error::parse(
        format!("line {}, column {}", e.line(), e.column()),
        e.to_string(),
    )
}

pub fn parse_instance(text: &str) -> Result<InstanceFile> {
    let raw: RawInstance = serde_json::from_str(text).map_err(json_error)?;
    if raw.version != FORMAT_VERSION {
        return Err(Error::parse(
            "version",
            format!("unsupported format version {}", raw.version),
        ));
    }
    if raw.clusters.len() != raw.k {
        return Err(Error::parse(
            "clusters",
            format!("{} labels for k = {}", raw.clusters.len(), raw.k),
        ));
    }
    if raw.k < 2 {
        return Err(Error::parse(
            "k",
            format!("need at least 2 clusters, got {}", raw.k),
        ));
    }
    let mut cluster_of: HashMap<&str, usize> = HashMap::new();
    for (l, label) in raw.clusters.iter().enumerate() {
        if cluster_of.insert(label, l).is_some() {
            return Err(Error::parse(
                format!("clusters[{l}]"),
                format!("duplicate cluster label {label:?}"),
            ));
        }
    }
    if raw.objects.len() != raw.n {
        return Err(Error::parse(
            "n",
            format!("header says {} objects, found {}", raw.n, raw.objects.len()),
        ));
    }
    if let Some(labels) = &raw.tag_labels {
        if labels.len() != raw.m {
            return Err(Error::parse(
                "tag_labels",
                format!("{} labels for m = {}", labels.len(), raw.m),
            ));
        }
    }
    let mut seen: HashMap<&str, usize> = HashMap::new();
    let mut objects = Vec::with_capacity(raw.n);
    for (i, o) in raw.objects.iter().enumerate() {
        if let Some(first) = seen.insert(&o.id, i) {
            return Err(Error::parse(
                format!("objects[{i}].id"),
                format!("duplicate object id {:?} (first at objects[{first}])", o.id),
            ));
        }
        let &cluster = cluster_of.get(o.cluster.as_str()).ok_or_else(|| {
            Error::parse(
                format!("objects[{i}].cluster"),
                format!("unknown cluster label {:?}", o.cluster),
            )
        })?;
        let mut tags = Vec::with_capacity(o.tags.len());
        for (t, &j) in o.tags.iter().enumerate() {
            if j < 0 || j as u64 >= raw.m as u64 {
                return Err(Error::parse(
                    format!("objects[{i}].tags[{t}]"),
                    format!("tag {j} outside [0, {})", raw.m),
                ));
            }
            tags.push(j as usize);
        }
        objects.push((cluster, tags));
    }
    Ok(InstanceFile {
        instance: Instance::new(raw.k, raw.m, objects)?,
        cluster_labels: raw.clusters,
        object_labels: raw.objects.into_iter().map(|o| o.id).collect(),
        tag_labels: raw.tag_labels,
    })
}

fn json<T: Serialize + ?Sized>(value: &T) -> String {
    serde_json::to_string(value).expect("plain data serializes")
}

pub fn serialize_instance(file: &InstanceFile) -> String {
    let inst = &file.instance;
    let mut out = String::new();
    out.push_str("{\n");
    out.push_str(&format!(
        "  \"clusters\": {},\n",
        json(&file.cluster_labels)
    ));
    out.push_str(&format!("  \"k\": {},\n", inst.k()));
    out.push_str(&format!("  \"m\": {},\n", inst.m()));
    out.push_str(&format!("  \"n\": {},\n", inst.n()));
    if inst.n() == 0 {
        out.push_str("  \"objects\": [],\n");
    } else {
        out.push_str("  \"objects\": [\n");
        for (i, o) in inst.objects().iter().enumerate() {
            let sep = if i + 1 == inst.n() { "" } else { "," };
            out.push_str(&format!(
                "    {{\"cluster\": {}, \"id\": {}, \"tags\": {}}}{sep}\n",
                json(&file.cluster_labels[o.cluster]),
                json(&file.object_labels[i]),
                json(&o.tags),
            ));
        }
        out.push_str("  ],\n");
    }
    if let Some(labels) = &file.tag_labels {
        out.push_str(&format!("  \"tag_labels\": {},\n", json(labels)));
    }
    out.push_str(&format!("  \"version\": {FORMAT_VERSION}\n}}\n"));
    out
}

pub fn read_instance(path: impl AsRef<Path>) -> Result<InstanceFile> {
    let path = path.as_ref();
    let text = fs::read_to_string(path)?;
    parse_instance(&text).map_err(|e| match e {
        Error::Parse { locus, message } => Error::Parse {
            locus: format!("{}: {locus}", path.display()),
            message,
        },
        other => other,
    })
}

pub fn write_instance(path: impl AsRef<Path>, file: &InstanceFile) -> Result<()> {
    fs::write(path, serialize_instance(file))?;
    Ok(())
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolution {
    descriptors: Vec<Vec<usize>>,
}

/// Parses `{"descriptors": [[…], …]}`; with an instance, checks the cluster
/// count and tag range.
pub fn parse_solution(text: &str, instance: Option<&Instance>) -> Result<Solution> {
    let raw: RawSolution = serde_json::from_str(text).map_err(json_error)?;
    if let Some(inst) = instance {
        if raw.descriptors.len() != inst.k() {
            return Err(Error::parse(
                "descriptors",
                format!("{} descriptors for k = {}", raw.descriptors.len(), inst.k()),
            ));
        }
        for (l, d) in raw.descriptors.iter().enumerate() {
            if let Some((t, &j)) = d.iter().enumerate().find(|(_, &j)| j >= inst.m()) {
                return Err(Error::parse(
                    format!("descriptors[{l}][{t}]"),
                    format!("tag {j} outside [0, {})", inst.m()),
                ));
            }
        }
    }
    Ok(Solution::new(raw.descriptors))
}

pub fn serialize_solution(solution: &Solution) -> String {
    let mut map = BTreeMap::new();
    map.insert("descriptors", &solution.descriptors);
    format!("{}\n", json(&map))
}
