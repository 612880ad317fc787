use super::topology::ParallelTopology;

/// Transformer shape and batching parameters used to derive parameter
/// counts and per-iteration communication volumes.
#[derive(Debug, Clone, PartialEq)]
pub struct TrafficModel {
    /// Transformer layers.
    pub layers: u64,
    /// Hidden size.
    pub hidden: u64,
    /// Attention heads.
    pub heads: u64,
    /// Per-head dimension.
    pub head_dim: u64,
    /// Vocabulary size.
    pub vocab: u64,
    /// Maximum context length.
    pub context: u64,
    /// Micro-batch size.
    pub micro_batch: u64,
    /// Micro-batches per global batch.
    pub num_micro_batches: u64,
    /// Gradient payload proportionality constant for DP traffic.
    pub grad_bytes_factor: f64,
    /// Bytes per tensor element (half precision by default).
    pub element_bytes: u64,
}

impl TrafficModel {
    pub const DEFAULT_GRAD_BYTES_FACTOR: f64 = 2.0;
    pub const DEFAULT_ELEMENT_BYTES: u64 = 2;

    /// Exact parameter count:
    /// `N = v*h + n_ctx*h + 4*h*n_h*d*L + L*(8*h^2 + 5*h)`.
    pub fn param_count(&self) -> u64 {
        let h = self.hidden;
        let l = self.layers;
        self.vocab * h + self.context * h + 4 * h * self.heads * self.head_dim * l
            + l * (8 * h * h + 5 * h)
    }

    /// The `12*L*h^2` approximation of the parameter count.
    pub fn param_count_approx(&self) -> u64 {
        12 * self.layers * self.hidden * self.hidden
    }
}

/// Per-iteration communication volumes in bytes for each parallelism axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CommVolumes {
    pub tp_bytes: f64,
    pub dp_bytes: f64,
    pub pp_bytes: f64,
}

/// Per-iteration traffic for the three parallel axes:
/// `Comm_TP = 8*b*m*n_ctx*h*L*(T-1)/(P*T)`, `Comm_DP = k*N/(T*P)`,
/// `Comm_PP = m*b*n_ctx*h`, each scaled to bytes by the element size.
pub fn comm_volumes(model: &TrafficModel, topo: &ParallelTopology) -> CommVolumes {
    let t = topo.tp_size as f64;
    let p = topo.pp_size as f64;
    let elem = model.element_bytes as f64;
    let b = model.micro_batch as f64;
    let m = model.num_micro_batches as f64;
    let n_ctx = model.context as f64;
    let h = model.hidden as f64;
    let l = model.layers as f64;

    let tp_bytes = 8.0 * b * m * n_ctx * h * l * (t - 1.0) / (p * t) * elem;
    let dp_bytes = model.grad_bytes_factor * model.param_count() as f64 / (t * p) * elem;
    let pp_bytes = m * b * n_ctx * h * elem;
    CommVolumes {
        tp_bytes,
        dp_bytes,
        pp_bytes,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::topology::ParallelTopology;

    fn model(layers: u64, hidden: u64) -> TrafficModel {
        TrafficModel {
            layers,
            hidden,
            heads: 1,
            head_dim: 1,
            vocab: 0,
            context: 64,
            micro_batch: 1,
            num_micro_batches: 8,
            grad_bytes_factor: TrafficModel::DEFAULT_GRAD_BYTES_FACTOR,
            element_bytes: TrafficModel::DEFAULT_ELEMENT_BYTES,
        }
    }

    fn topo(t: usize, d: usize, p: usize) -> ParallelTopology {
        let total = t * d * p;
        let gpn = t.max(1);
        let nodes = total / gpn;
        ParallelTopology::canonical(
            t,
            d,
            p,
            gpn,
            ParallelTopology::full_mesh_links(nodes, 1e9),
            1e11,
        )
        .unwrap()
    }

    #[test]
    fn approximation_small_dims() {
        // L=2, h=4: 12 * 2 * 16 = 384.
        let m = model(2, 4);
        assert_eq!(m.param_count_approx(), 384);
    }

    #[test]
    fn zeroed_terms_leave_ffn_only() {
        let mut m = model(3, 8);
        m.vocab = 0;
        m.context = 0;
        m.heads = 0;
        m.head_dim = 0;
        // N = L*(8h^2 + 5h)
        assert_eq!(m.param_count(), 3 * (8 * 64 + 5 * 8));
    }

    #[test]
    fn gpt2_xl_exact_close_to_approximation() {
        // GPT-2 XL shape: 48 layers, hidden 1600, 25 heads of 64,
        // vocab 50257, context 1024.
        let m = TrafficModel {
            layers: 48,
            hidden: 1600,
            heads: 25,
            head_dim: 64,
            vocab: 50257,
            context: 1024,
            micro_batch: 1,
            num_micro_batches: 1,
            grad_bytes_factor: 2.0,
            element_bytes: 2,
        };
        // Independent evaluation of both closed forms.
        let exact = 50257u64 * 1600
            + 1024 * 1600
            + 4 * 1600 * 25 * 64 * 48
            + 48 * (8 * 1600 * 1600 + 5 * 1600);
        let approx = 12u64 * 48 * 1600 * 1600;
        assert_eq!(m.param_count(), exact);
        assert_eq!(m.param_count_approx(), approx);
        let ratio = exact as f64 / approx as f64;
        assert!((ratio - 1.0).abs() < 0.15, "ratio {ratio}");
    }

    #[test]
    fn tp_volume_vanishes_without_tensor_parallelism() {
        let vols = comm_volumes(&model(4, 256), &topo(1, 2, 2));
        assert_eq!(vols.tp_bytes, 0.0);
    }

    #[test]
    fn pp_volume_defined_even_for_single_stage() {
        let m = model(4, 256);
        let vols = comm_volumes(&m, &topo(1, 4, 1));
        let expected = (m.num_micro_batches * m.micro_batch * m.context * m.hidden
            * m.element_bytes) as f64;
        assert_eq!(vols.pp_bytes, expected);
    }

    #[test]
    fn dp_pp_ratio_scales_with_hidden_size() {
        // Same dims except h: the DP/PP ratio grows like Theta(h^2)/Theta(h).
        let narrow = model(32, 64);
        let wide = model(32, 1024);
        let t = topo(1, 2, 2);
        let r_narrow = {
            let v = comm_volumes(&narrow, &t);
            v.dp_bytes / v.pp_bytes
        };
        let r_wide = {
            let v = comm_volumes(&wide, &t);
            v.dp_bytes / v.pp_bytes
        };
        let growth = r_wide / r_narrow;
        // Exact value from the closed forms: (64 + L(9+8*1024)) / (64 + L(9+8*64)).
        let expected = (64.0 + 32.0 * (9.0 + 8.0 * 1024.0)) / (64.0 + 32.0 * (9.0 + 8.0 * 64.0));
        assert!((growth - expected).abs() < 1e-9);
        assert!(growth > 14.0 && growth < 16.5, "growth {growth}");
    }

    #[test]
    fn dp_dominates_pp_for_training_scale_models() {
        // Representative training shapes (GPT-2 family sizes and parallel
        // layouts); the DP-over-PP dominance holds across all of them.
        let shapes: &[(u64, u64, u64, u64)] = &[
            // (layers, hidden, context, micro_batches)
            (12, 768, 1024, 8),
            (24, 1024, 1024, 16),
            (36, 1280, 2048, 32),
            (48, 1600, 2048, 32),
            (40, 5120, 2048, 64),
        ];
        for &(l, h, n_ctx, m) in shapes {
            for &(t, d, p) in &[(1usize, 2usize, 2usize), (2, 2, 2), (4, 2, 4)] {
                let tm = TrafficModel {
                    layers: l,
                    hidden: h,
                    heads: 16,
                    head_dim: h / 16,
                    vocab: 50257,
                    context: n_ctx,
                    micro_batch: 1,
                    num_micro_batches: m,
                    grad_bytes_factor: 2.0,
                    element_bytes: 2,
                };
                let vols = comm_volumes(&tm, &topo(t, d, p));
                assert!(
                    vols.dp_bytes > vols.pp_bytes,
                    "dp {} <= pp {} for L={l} h={h}",
                    vols.dp_bytes,
                    vols.pp_bytes
                );
            }
        }
    }

    #[test]
    fn exact_count_dominates_approximation() {
        // With the standard head split (n_h * d = h) and nonzero embeddings
        // the exact form exceeds 12Lh^2 by 5Lh + (v + n_ctx)h.
        for &(l, h) in &[(2u64, 128u64), (12, 768), (48, 1600)] {
            let m = TrafficModel {
                layers: l,
                hidden: h,
                heads: 8,
                head_dim: h / 8,
                vocab: 1000,
                context: 256,
                micro_batch: 1,
                num_micro_batches: 1,
                grad_bytes_factor: 2.0,
                element_bytes: 2,
            };
            assert!(m.param_count() >= m.param_count_approx());
        }
    }
}
