use crate::scalar::Scalar;

/// Horizontal extent of one item to be stacked in a track.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PackItem<S> {
    pub left: S,
    pub right: S,
    pub narrative_index: u32,
}

/// First-fit lane assignment.
///
/// Items are visited by left edge, then narrative index, and each goes into
/// the lowest lane where it stays at least `padding` away from every item
/// already there. Returns item indices per lane in placement order.
///
/// `padding` must be positive. Because items arrive sorted by left edge, an
/// item fits a lane exactly when it starts `padding` past the rightmost edge
/// placed in that lane so far.
pub fn pack_track<S: Scalar>(items: &[PackItem<S>], padding: S) -> Vec<Vec<usize>> {
    debug_assert!(padding > S::zero(), "padding must be positive");
    let mut order: Vec<usize> = (0..items.len()).collect();
    order.sort_by(|&a, &b| {
        let (x, y) = (&items[a], &items[b]);
        x.left
            .partial_cmp(&y.left)
            .expect("finite extents")
            .then(x.narrative_index.cmp(&y.narrative_index))
            .then(a.cmp(&b))
    });

    let mut lanes: Vec<Vec<usize>> = Vec::new();
    let mut lane_right: Vec<S> = Vec::new();
    for i in order {
        let item = &items[i];
        match lane_right.iter().position(|&r| item.left >= r + padding) {
            Some(lane) => {
                lanes[lane].push(i);
                if item.right > lane_right[lane] {
                    lane_right[lane] = item.right;
                }
            }
            None => {
                lanes.push(vec![i]);
                lane_right.push(item.right);
            }
        }
    }
    lanes
}
