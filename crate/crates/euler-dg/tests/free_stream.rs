//! Free-stream preservation: a constant state must produce zero residual away
//! from surfaces where the boundary conditions see non-zero normal velocity.

use euler_dg::{BumpMeshSpec, EulerDgOps, FlowBoundaryConditions, FreeStream, N_FIELDS};

#[test]
fn flat_channel_preserves_free_stream_everywhere() {
    for p in 1..=3 {
        let (disc, x) = BumpMeshSpec::new(6, 3, p, 0.0).generate();
        let fs = FreeStream::new(0.3);
        let bc = FlowBoundaryConditions::channel(&fs, 1.0);
        let ops = EulerDgOps::new(&disc, &bc);
        let u = fs.fill_state(disc.n_state());
        let r = ops.residual(&u, &x).unwrap();
        let max = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        assert!(max < 1e-12, "p={p}: max residual {max:.3e}");
    }
}

#[test]
fn curved_mesh_preserves_free_stream_in_the_interior() {
    for p in 1..=3 {
        let (disc, x) = BumpMeshSpec::new(10, 4, p, 0.0625).generate();
        let fs = FreeStream::new(0.3);
        let bc = FlowBoundaryConditions::channel(&fs, 1.0);
        let ops = EulerDgOps::new(&disc, &bc);
        let u = fs.fill_state(disc.n_state());
        let r = ops.residual(&u, &x).unwrap();
        // cells not touching the curved bottom wall must be exactly preserved
        let k = disc.tables.n_sol * N_FIELDS;
        let mut max = 0.0f64;
        for cy in 1..disc.ny {
            for cx in 0..disc.nx {
                let cell = disc.cell_index(cx, cy);
                for loc in 0..k {
                    max = max.max(r[cell * k + loc].abs());
                }
            }
        }
        assert!(max < 1e-12, "p={p}: interior max residual {max:.3e}");
        // wall cells see the bump and pick up a genuine non-zero defect
        let wall_max = (0..disc.nx)
            .flat_map(|cx| {
                let cell = disc.cell_index(cx, 0);
                (0..k).map(move |loc| (cell, loc))
            })
            .map(|(cell, loc)| r[cell * k + loc].abs())
            .fold(0.0f64, f64::max);
        assert!(wall_max > 1e-8, "p={p}: bump wall unexpectedly silent");
    }
}
