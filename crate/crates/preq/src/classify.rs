//! Interaction summary of a multi-preq run: group tracking, clustering and
//! a coarse outcome label.

use preq_core::math::rotate;
use preq_core::Vec3;
use serde::Serialize;

use crate::config::ClassifierConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    NoInteraction,
    ElasticRebound,
    VortexExchange,
    DipoleBreakup,
    Unclassified,
}

/// Closest approach compared with free flight.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ForceSense {
    Attractive,
    Repulsive,
    Neutral,
}

/// Uninteracting motion of one preq: rigid rotation of its start location
/// by `omega` (zero on the plane).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FreeFlight {
    pub start: [f64; 3],
    pub omega: [f64; 3],
}

impl FreeFlight {
    pub fn location(&self, t: f64) -> Vec3 {
        rotate(&Vec3::from(self.omega), t, &Vec3::from(self.start))
    }
}

/// What the classifier knows about the preqs of a run.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupLayout {
    /// Vortex indices of each preq.
    pub groups: Vec<Vec<usize>>,
    pub strengths: Vec<f64>,
    pub diameters: Vec<f64>,
    /// Sorted pair distances of each undisturbed preq.
    pub reference_shapes: Vec<Vec<f64>>,
    /// Free flight of every preq, when a prediction exists for all.
    pub free_flight: Option<Vec<FreeFlight>>,
    /// Sphere radius; group means are projected onto the sphere.
    pub radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cluster {
    pub members: Vec<usize>,
    pub net_strength: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MembershipChange {
    pub t: f64,
    pub vortex: usize,
    pub from: usize,
    pub to: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InteractionSummary {
    pub classification: Classification,
    pub force: Option<ForceSense>,
    /// Smallest distance between the means of two preqs.
    pub min_separation: f64,
    pub min_separation_time: f64,
    pub free_flight_min_separation: Option<f64>,
    pub diameter: f64,
    pub initial_groups: Vec<Vec<usize>>,
    /// Nearest-group label of every vortex at the last sample.
    pub final_labels: Vec<usize>,
    pub final_clusters: Vec<Cluster>,
    pub dipoles: Vec<[usize; 2]>,
    /// Largest relative pair-distance deviation of each preq from its
    /// equilibrium shape at the end.
    pub shape_deviation: Vec<f64>,
    pub membership_changes: Vec<MembershipChange>,
    pub samples: usize,
}

fn group_mean(points: &[Vec3], members: &[usize], radius: Option<f64>) -> Option<Vec3> {
    if members.is_empty() {
        return None;
    }
    let m = members.iter().map(|&i| points[i]).sum::<Vec3>() / members.len() as f64;
    match radius {
        Some(r) => {
            let n = m.norm();
            (n > 1e-9 * r).then(|| m * (r / n))
        }
        None => Some(m),
    }
}

/// Single-linkage clusters with linking distance `h`, each sorted, ordered
/// by smallest member.
pub fn clusters(points: &[Vec3], h: f64) -> Vec<Vec<usize>> {
    let n = points.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn root(p: &mut [usize], mut i: usize) -> usize {
        while p[i] != i {
            p[i] = p[p[i]];
            i = p[i];
        }
        i
    }
    for i in 0..n {
        for j in i + 1..n {
            if (points[i] - points[j]).norm() < h {
                let (a, b) = (root(&mut parent, i), root(&mut parent, j));
                if a != b {
                    parent[a.max(b)] = a.min(b);
                }
            }
        }
    }
    let mut out: Vec<Vec<usize>> = Vec::new();
    let mut index = vec![usize::MAX; n];
    for i in 0..n {
        let r = root(&mut parent, i);
        if index[r] == usize::MAX {
            index[r] = out.len();
            out.push(Vec::new());
        }
        out[index[r]].push(i);
    }
    out
}

/// Sorted pair distances of the given points.
pub fn shape_of(points: &[Vec3]) -> Vec<f64> {
    let mut d: Vec<f64> = Vec::new();
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            d.push((points[i] - points[j]).norm());
        }
    }
    d.sort_by(f64::total_cmp);
    d
}

fn shape_deviation(shape: &[f64], reference: &[f64]) -> f64 {
    if shape.len() != reference.len() {
        return f64::INFINITY;
    }
    shape
        .iter()
        .zip(reference)
        .map(|(a, b)| ((a - b) / b).abs())
        .fold(0.0, f64::max)
}

fn same_partition(a: &[Vec<usize>], b: &[Vec<usize>]) -> bool {
    let norm = |p: &[Vec<usize>]| {
        let mut v: Vec<Vec<usize>> = p
            .iter()
            .map(|g| {
                let mut g = g.clone();
                g.sort_unstable();
                g
            })
            .collect();
        v.sort();
        v
    };
    norm(a) == norm(b)
}

/// Runs the classifier over sampled states (embedded in ℝ³).
pub fn classify_interaction(
    times: &[f64],
    states: &[Vec<Vec3>],
    layout: &GroupLayout,
    cfg: &ClassifierConfig,
) -> InteractionSummary {
    let n = layout.strengths.len();
    let k = layout.groups.len();
    let diameter = layout.diameters.iter().copied().fold(0.0, f64::max);
    let scale = layout.strengths.iter().map(|g| g.abs()).fold(0.0, f64::max);
    let link = cfg.linkage * diameter;

    let mut labels = vec![0usize; n];
    for (g, members) in layout.groups.iter().enumerate() {
        for &i in members {
            labels[i] = g;
        }
    }
    let mut changes = Vec::new();
    let mut min_sep = f64::INFINITY;
    let mut min_time = 0.0;
    let mut free_min: Option<f64> = layout.free_flight.as_ref().map(|_| f64::INFINITY);

    for (t, pts) in times.iter().zip(states) {
        let means: Vec<Option<Vec3>> = layout
            .groups
            .iter()
            .map(|g| group_mean(pts, g, layout.radius))
            .collect();
        for a in 0..k {
            for b in a + 1..k {
                if let (Some(p), Some(q)) = (means[a], means[b]) {
                    let d = (p - q).norm();
                    if d < min_sep {
                        min_sep = d;
                        min_time = *t;
                    }
                }
            }
        }
        if let (Some(ff), Some(fm)) = (&layout.free_flight, free_min.as_mut()) {
            for a in 0..k {
                for b in a + 1..k {
                    *fm = fm.min((ff[a].location(*t) - ff[b].location(*t)).norm());
                }
            }
        }
        let centroids: Vec<Option<Vec3>> = (0..k)
            .map(|g| {
                let members: Vec<usize> = (0..n).filter(|&i| labels[i] == g).collect();
                group_mean(pts, &members, None)
            })
            .collect();
        for (i, p) in pts.iter().enumerate() {
            let best = centroids
                .iter()
                .enumerate()
                .filter_map(|(g, c)| c.map(|c| (g, (c - p).norm())))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .map(|(g, _)| g)
                .unwrap_or(labels[i]);
            if best != labels[i] {
                changes.push(MembershipChange {
                    t: *t,
                    vortex: i,
                    from: labels[i],
                    to: best,
                });
                labels[i] = best;
            }
        }
    }

    let last = states.last().cloned().unwrap_or_default();
    let final_parts = if last.is_empty() { Vec::new() } else { clusters(&last, link) };
    let final_clusters: Vec<Cluster> = final_parts
        .iter()
        .map(|c| Cluster {
            members: c.clone(),
            net_strength: c.iter().map(|&i| layout.strengths[i]).sum(),
        })
        .collect();

    let window = ((states.len() as f64 * cfg.persistence).ceil() as usize).clamp(1, states.len().max(1));
    let tail: Vec<Vec<Vec<usize>>> = states[states.len().saturating_sub(window)..]
        .iter()
        .map(|s| clusters(s, link))
        .collect();
    let dipoles: Vec<[usize; 2]> = final_clusters
        .iter()
        .filter(|c| c.members.len() == 2 && c.net_strength.abs() < cfg.dipole_strength * scale)
        .map(|c| [c.members[0], c.members[1]])
        .filter(|d| tail.iter().all(|parts| parts.iter().any(|p| p[..] == d[..])))
        .collect();

    let shape_dev: Vec<f64> = layout
        .groups
        .iter()
        .zip(&layout.reference_shapes)
        .map(|(g, r)| {
            if last.is_empty() {
                return f64::INFINITY;
            }
            let pts: Vec<Vec3> = g.iter().map(|&i| last[i]).collect();
            shape_deviation(&shape_of(&pts), r)
        })
        .collect();

    let origin_of = |i: usize| layout.groups.iter().position(|g| g.contains(&i));
    let intact = same_partition(&final_parts, &layout.groups);
    let separated = final_parts.iter().filter(|c| c.len() >= 2).count() >= 2;
    let mixed = final_parts.iter().any(|c| {
        let first = origin_of(c[0]);
        c.iter().any(|&i| origin_of(i) != first)
    });

    let classification = if intact && min_sep > 2.0 * diameter {
        Classification::NoInteraction
    } else if !dipoles.is_empty() {
        Classification::DipoleBreakup
    } else if !intact && separated && mixed {
        Classification::VortexExchange
    } else if intact && shape_dev.iter().all(|d| *d <= cfg.shape_tolerance) {
        Classification::ElasticRebound
    } else {
        Classification::Unclassified
    };

    let margin = cfg.force_margin * diameter;
    let force = free_min.map(|f| {
        if min_sep > f + margin {
            ForceSense::Repulsive
        } else if min_sep < f - margin {
            ForceSense::Attractive
        } else {
            ForceSense::Neutral
        }
    });

    InteractionSummary {
        classification,
        force,
        min_separation: min_sep,
        min_separation_time: min_time,
        free_flight_min_separation: free_min,
        diameter,
        initial_groups: layout.groups.clone(),
        final_labels: labels,
        final_clusters,
        dipoles,
        shape_deviation: shape_dev,
        membership_changes: changes,
        samples: states.len(),
    }
}
