/// Pareto dominance for minimization.
pub fn dominates(f: &[f64], g: &[f64]) -> bool {
    let mut strictly = false;
    for (a, b) in f.iter().zip(g) {
        if a > b {
            return false;
        }
        if a < b {
            strictly = true;
        }
    }
    strictly
}

/// Deb's fast non-dominated sort; returns a rank per point (0 = first front).
pub fn fast_nondominated_sort<V: AsRef<[f64]>>(points: &[V]) -> Vec<usize> {
    let n = points.len();
    let mut dominated_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut counts = vec![0usize; n];
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (points[i].as_ref(), points[j].as_ref());
            if dominates(a, b) {
                dominated_by[i].push(j);
                counts[j] += 1;
            } else if dominates(b, a) {
                dominated_by[j].push(i);
                counts[i] += 1;
            }
        }
    }
    let mut ranks = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| counts[i] == 0).collect();
    let mut rank = 0;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            ranks[i] = rank;
            for &j in &dominated_by[i] {
                counts[j] -= 1;
                if counts[j] == 0 {
                    next.push(j);
                }
            }
        }
        rank += 1;
        front = next;
    }
    ranks
}

/// Crowding distance within one front. Boundary points get `+inf`.
pub fn crowding_distance<V: AsRef<[f64]>>(front: &[V]) -> Vec<f64> {
    let n = front.len();
    if n <= 2 {
        return vec![f64::INFINITY; n];
    }
    let m = front[0].as_ref().len();
    let mut distance = vec![0.0; n];
    let mut order: Vec<usize> = (0..n).collect();
    for k in 0..m {
        let key = |i: usize| front[i].as_ref()[k];
        order.sort_by(|&a, &b| key(a).total_cmp(&key(b)));
        let (lo, hi) = (key(order[0]), key(order[n - 1]));
        let range = hi - lo;
        if range <= 0.0 {
            continue;
        }
        distance[order[0]] = f64::INFINITY;
        distance[order[n - 1]] = f64::INFINITY;
        for w in 1..n - 1 {
            let i = order[w];
            if distance[i].is_finite() {
                distance[i] += (key(order[w + 1]) - key(order[w - 1])) / range;
            }
        }
    }
    distance
}

/// Ranks and per-front crowding distances for a set of objective vectors.
pub fn assign_rank_and_crowding<V: AsRef<[f64]>>(points: &[V]) -> (Vec<usize>, Vec<f64>) {
    let ranks = fast_nondominated_sort(points);
    let mut crowding = vec![0.0; points.len()];
    let max_rank = ranks.iter().copied().max().map_or(0, |r| r + 1);
    for r in 0..max_rank {
        let members: Vec<usize> = (0..points.len()).filter(|&i| ranks[i] == r).collect();
        let front: Vec<&[f64]> = members.iter().map(|&i| points[i].as_ref()).collect();
        for (&i, d) in members.iter().zip(crowding_distance(&front)) {
            crowding[i] = d;
        }
    }
    (ranks, crowding)
}
