//! Finite-difference checks for each differentiable piece, one random
//! configuration per seed. Linear pieces are checked through the scalar
//! objective `Σ r ⊙ f(x)` with a random projection `r`.

use defvec::autoencoder::{
    avgpool2_backward, avgpool2_forward, bce_grad, bce_loss, conv2d_backward, conv2d_forward,
    upsample2_backward, upsample2_forward, Activation, Architecture, AutoencoderModel, ConvKind,
    ConvLayer, Tensor4,
};
use rand::Rng;

use super::{dot, fd_check, positive, random_layer, random_tensor, rng, uniform_vec, GradCheck};

fn random_shape(r: &mut rand_chacha::ChaCha8Rng, even: bool) -> [usize; 4] {
    let side = |r: &mut rand_chacha::ChaCha8Rng| {
        if even {
            2 * r.random_range(1..=4)
        } else {
            r.random_range(1..=8)
        }
    };
    [r.random_range(1..=2), r.random_range(1..=4), side(r), side(r)]
}

/// Input, weight and bias gradients of one layer.
pub fn conv(seed: u64, kind: ConvKind, act: Activation) -> GradCheck {
    let mut r = rng(seed);
    let shape = random_shape(&mut r, false);
    let out_ch = r.random_range(1..=4);
    let layer = random_layer(&mut r, kind, act, shape[1], out_ch);
    let x = random_tensor(&mut r, shape, -1.0, 1.0);
    let y = conv2d_forward(&x, &layer).unwrap();
    let proj = uniform_vec(&mut r, y.data().len(), -1.0, 1.0);
    let grads = conv2d_backward(&x, &layer, &Tensor4::from_vec(y.shape(), proj.clone()).unwrap()).unwrap();
    let relu = act == Activation::Relu;
    let objective = |x: &Tensor4<f64>, l: &ConvLayer<f64>| {
        let y = conv2d_forward(x, l).unwrap();
        let pattern = if relu {
            // sign of the pre-activation
            let linear = ConvLayer::new(
                l.kind(),
                Activation::Identity,
                l.in_ch(),
                l.out_ch(),
                l.weights().to_vec(),
                l.bias().to_vec(),
            )
            .unwrap();
            positive(conv2d_forward(x, &linear).unwrap().data())
        } else {
            Vec::new()
        };
        (dot(y.data(), &proj), pattern)
    };

    let mut report = fd_check(grads.grad_x.data(), |i, d| {
        let mut xp = x.clone();
        xp.data_mut()[i] += d;
        objective(&xp, &layer)
    });
    report.merge(&fd_check(&grads.grad_w, |i, d| {
        let mut lp = layer.clone();
        lp.weights_mut()[i] += d;
        objective(&x, &lp)
    }));
    report.merge(&fd_check(&grads.grad_b, |i, d| {
        let mut lp = layer.clone();
        lp.bias_mut()[i] += d;
        objective(&x, &lp)
    }));
    report
}

pub fn pool(seed: u64) -> GradCheck {
    let mut r = rng(seed);
    let shape = random_shape(&mut r, true);
    let x = random_tensor(&mut r, shape, -1.0, 1.0);
    let y = avgpool2_forward(&x).unwrap();
    let proj = random_tensor(&mut r, y.shape(), -1.0, 1.0);
    let g = avgpool2_backward(&proj, shape).unwrap();
    fd_check(g.data(), |i, d| {
        let mut xp = x.clone();
        xp.data_mut()[i] += d;
        (dot(avgpool2_forward(&xp).unwrap().data(), proj.data()), Vec::new())
    })
}

pub fn upsample(seed: u64) -> GradCheck {
    let mut r = rng(seed);
    let shape = random_shape(&mut r, false);
    let x = random_tensor(&mut r, shape, -1.0, 1.0);
    let y = upsample2_forward(&x).unwrap();
    let proj = random_tensor(&mut r, y.shape(), -1.0, 1.0);
    let g = upsample2_backward(&proj).unwrap();
    fd_check(g.data(), |i, d| {
        let mut xp = x.clone();
        xp.data_mut()[i] += d;
        (dot(upsample2_forward(&xp).unwrap().data(), proj.data()), Vec::new())
    })
}

pub fn activation(seed: u64, act: Activation) -> GradCheck {
    let mut r = rng(seed);
    let n = r.random_range(1..=64);
    let x = uniform_vec(&mut r, n, -4.0, 4.0);
    let proj = uniform_vec(&mut r, n, -1.0, 1.0);
    let mut y = x.clone();
    act.apply(&mut y);
    let mut g = proj.clone();
    act.backward(&y, &mut g);
    fd_check(&g, |i, d| {
        let mut xp = x.clone();
        xp[i] += d;
        let pattern = if act == Activation::Relu { positive(&xp) } else { Vec::new() };
        act.apply(&mut xp);
        (dot(&xp, &proj), pattern)
    })
}

/// Gradient of mean BCE w.r.t. the reconstruction. Targets are binary so no
/// component sits at a near-zero gradient, where the central difference's
/// truncation error dominates; continuous targets are covered by [`model`].
pub fn bce(seed: u64) -> GradCheck {
    let mut r = rng(seed);
    let shape = random_shape(&mut r, false);
    let recon = random_tensor(&mut r, shape, 0.2, 0.8);
    let mut target = random_tensor(&mut r, shape, 0.0, 1.0);
    target.data_mut().iter_mut().for_each(|t| *t = t.round());
    let g = bce_grad(&recon, &target).unwrap();
    fd_check(g.data(), |i, d| {
        let mut rp = recon.clone();
        rp.data_mut()[i] += d;
        (bce_loss(&rp, &target).unwrap(), Vec::new())
    })
}

/// Every parameter and input component of `bce(decode(encode(x)), t)` for a
/// two-stage model on a 1×3×8×8 input.
pub fn model(seed: u64) -> GradCheck {
    let mut r = rng(seed);
    let arch = Architecture::new(vec![3, 4, 5]).unwrap();
    let model = AutoencoderModel::<f64>::new(&arch, seed);
    let x = random_tensor(&mut r, [1, 3, 8, 8], 0.0, 1.0);
    let target = random_tensor(&mut r, [1, 3, 8, 8], 0.0, 1.0);
    let (_, grads) = model.loss_and_grads(&x, &target).unwrap();
    let eval = |m: &AutoencoderModel<f64>, x: &Tensor4<f64>| {
        let pattern = m.trace(x.data(), 8).relu_pattern(m);
        (m.loss(x, &target).unwrap(), pattern)
    };

    let mut report = fd_check(grads.input.data(), |i, d| {
        let mut xp = x.clone();
        xp.data_mut()[i] += d;
        eval(&model, &xp)
    });
    let slices: Vec<Vec<f64>> = grads.slices().iter().map(|s| s.to_vec()).collect();
    for (k, g) in slices.iter().enumerate() {
        report.merge(&fd_check(g, |i, d| {
            let mut mp = model.clone();
            mp.param_slices_mut()[k][i] += d;
            eval(&mp, &x)
        }));
    }
    report
}
