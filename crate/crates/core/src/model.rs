//! Domain model for the three-tier offloading architecture: IoT devices
//! generate tasks, edge nodes execute them locally or ship them to a cloud
//! server over an uplink.

use serde::{Deserialize, Serialize};

/// Task identifier, dense from 0 within a run.
pub type TaskId = u64;
/// Compute node identifier (edge nodes and the cloud share one id space).
pub type NodeId = u32;
/// IoT device identifier.
pub type DeviceId = u32;

/// The two execution venues a task can be placed on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OffloadDecision {
    /// Execute on the edge node the task arrived at.
    Local,
    /// Ship to the cloud server and return the result over the downlink.
    Cloud,
}

impl std::fmt::Display for OffloadDecision {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            OffloadDecision::Local => write!(f, "local"),
            OffloadDecision::Cloud => write!(f, "cloud"),
        }
    }
}

/// A unit of offloadable work.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: TaskId,
    pub source_device: DeviceId,
    /// Arrival time at the attached edge node, seconds.
    pub arrival_time: f64,
    /// Input payload, bits.
    pub size_bits: f64,
    /// Result payload returned over the downlink, bits.
    pub result_bits: f64,
    /// CPU cycles required to execute.
    pub cycles: f64,
    /// Priority in [0, 1]; an input to the decision policy.
    pub priority: f64,
    /// Absolute deadline, seconds of simulation time.
    pub deadline: f64,
}

impl Task {
    /// Deadline budget counted from arrival, seconds.
    pub fn deadline_margin(&self) -> f64 {
        self.deadline - self.arrival_time
    }

    /// Returns every violated task invariant.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.size_bits > 0.0) {
            v.push(format!("task {}: size_bits must be > 0", self.id));
        }
        if !(self.cycles > 0.0) {
            v.push(format!("task {}: cycles must be > 0", self.id));
        }
        if !(self.deadline > self.arrival_time) {
            v.push(format!("task {}: deadline must be after arrival", self.id));
        }
        if !(0.0..=1.0).contains(&self.priority) {
            v.push(format!("task {}: priority must be in [0,1]", self.id));
        }
        if self.result_bits < 0.0 {
            v.push(format!("task {}: result_bits must be >= 0", self.id));
        }
        v
    }
}

/// Node tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tier {
    Edge,
    Cloud,
}

/// Static description of a compute node.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NodeSpec {
    pub id: NodeId,
    pub tier: Tier,
    /// CPU cycles per second.
    pub capacity_cps: f64,
    /// Idle power draw, watts.
    pub p_idle_w: f64,
    /// Power draw while executing, watts.
    pub p_active_w: f64,
    /// Maximum number of tasks waiting in the FIFO; `None` means unbounded
    /// (the cloud).
    pub queue_limit: Option<usize>,
}

/// One endpoint of a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LinkEndpoint {
    Device(DeviceId),
    Node(NodeId),
}

/// Static description of a network link.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinkSpec {
    pub from: LinkEndpoint,
    pub to: NodeId,
    /// Bits per second.
    pub bandwidth_bps: f64,
    /// One-way propagation delay, seconds.
    pub propagation_s: f64,
    /// Joules per transmitted bit, charged to the transmitting node.
    pub tx_energy_j_per_bit: f64,
}

/// An IoT device and the edge node it feeds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DeviceSpec {
    pub id: DeviceId,
    pub edge: NodeId,
}

/// The full three-tier network.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub devices: Vec<DeviceSpec>,
    pub edge_nodes: Vec<NodeSpec>,
    pub cloud: NodeSpec,
    pub device_links: Vec<LinkSpec>,
    /// Exactly one uplink per edge node, indexed by position to match
    /// `edge_nodes` after validation.
    pub uplinks: Vec<LinkSpec>,
}

impl Topology {
    /// Uplink of the given edge node. Panics if the topology was not
    /// validated first.
    pub fn uplink_of(&self, edge: NodeId) -> &LinkSpec {
        self.uplinks
            .iter()
            .find(|l| l.from == LinkEndpoint::Node(edge))
            .expect("validated topology has one uplink per edge node")
    }

    pub fn edge_spec(&self, edge: NodeId) -> &NodeSpec {
        self.edge_nodes
            .iter()
            .find(|n| n.id == edge)
            .expect("validated topology resolves edge ids")
    }

    pub fn device(&self, id: DeviceId) -> &DeviceSpec {
        self.devices
            .iter()
            .find(|d| d.id == id)
            .expect("validated topology resolves device ids")
    }
}

fn node_violations(node: &NodeSpec, out: &mut Vec<String>) {
    if !(node.capacity_cps > 0.0) {
        out.push(format!("node {}: capacity_cps must be > 0", node.id));
    }
    if node.p_idle_w < 0.0 || node.p_active_w < node.p_idle_w {
        out.push(format!(
            "node {}: power must satisfy p_active_w >= p_idle_w >= 0",
            node.id
        ));
    }
    match (node.tier, node.queue_limit) {
        (Tier::Edge, Some(limit)) if limit >= 1 => {}
        (Tier::Edge, _) => out.push(format!("node {}: edge queue_limit must be >= 1", node.id)),
        (Tier::Cloud, _) => {}
    }
}

fn link_violations(link: &LinkSpec, label: &str, out: &mut Vec<String>) {
    if !(link.bandwidth_bps > 0.0) {
        out.push(format!("{label}: bandwidth_bps must be > 0"));
    }
    if link.propagation_s < 0.0 {
        out.push(format!("{label}: propagation_s must be >= 0"));
    }
    if link.tx_energy_j_per_bit < 0.0 {
        out.push(format!("{label}: tx_energy_j_per_bit must be >= 0"));
    }
}

/// Checks every topology invariant and returns a human-readable description
/// of each violation. An empty list means the topology is valid.
pub fn validate_topology(topology: &Topology) -> Vec<String> {
    let mut out = Vec::new();

    let mut node_ids: Vec<NodeId> = topology.edge_nodes.iter().map(|n| n.id).collect();
    node_ids.push(topology.cloud.id);
    let mut sorted = node_ids.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != node_ids.len() {
        out.push("node ids are not unique".to_string());
    }

    let mut device_ids: Vec<DeviceId> = topology.devices.iter().map(|d| d.id).collect();
    device_ids.sort_unstable();
    let before = device_ids.len();
    device_ids.dedup();
    if device_ids.len() != before {
        out.push("device ids are not unique".to_string());
    }

    for node in &topology.edge_nodes {
        if node.tier != Tier::Edge {
            out.push(format!("node {}: listed as edge but tier is cloud", node.id));
        }
        node_violations(node, &mut out);
    }
    if topology.cloud.tier != Tier::Cloud {
        out.push(format!("node {}: cloud entry must have cloud tier", topology.cloud.id));
    }
    node_violations(&topology.cloud, &mut out);

    for dev in &topology.devices {
        if !topology.edge_nodes.iter().any(|n| n.id == dev.edge) {
            out.push(format!(
                "device {}: attached edge node {} does not exist",
                dev.id, dev.edge
            ));
        }
    }

    for (i, link) in topology.device_links.iter().enumerate() {
        link_violations(link, &format!("device link {i}"), &mut out);
        match link.from {
            LinkEndpoint::Device(d) => {
                if !topology.devices.iter().any(|dev| dev.id == d) {
                    out.push(format!("device link {i}: device {d} does not exist"));
                }
            }
            LinkEndpoint::Node(_) => {
                out.push(format!("device link {i}: must originate at a device"));
            }
        }
        if !topology.edge_nodes.iter().any(|n| n.id == link.to) {
            out.push(format!("device link {i}: target edge {} does not exist", link.to));
        }
    }

    for edge in &topology.edge_nodes {
        let n = topology
            .uplinks
            .iter()
            .filter(|l| l.from == LinkEndpoint::Node(edge.id))
            .count();
        if n != 1 {
            out.push(format!(
                "edge node {}: expected exactly one uplink to the cloud, found {n}",
                edge.id
            ));
        }
    }
    for (i, link) in topology.uplinks.iter().enumerate() {
        link_violations(link, &format!("uplink {i}"), &mut out);
        if link.to != topology.cloud.id {
            out.push(format!("uplink {i}: must terminate at the cloud node"));
        }
        match link.from {
            LinkEndpoint::Node(n) if topology.edge_nodes.iter().any(|e| e.id == n) => {}
            _ => out.push(format!("uplink {i}: must originate at an existing edge node")),
        }
    }

    out
}

/// Pure execution time of a task on a node, excluding any queueing.
pub fn local_exec_time(task: &Task, node: &NodeSpec) -> f64 {
    task.cycles / node.capacity_cps
}

/// Time to move `bits` across a link: serialization plus propagation.
pub fn transfer_time(bits: f64, link: &LinkSpec) -> f64 {
    bits / link.bandwidth_bps + link.propagation_s
}
