mod common;

use fiberseg_core::filter::Kernel;
use fiberseg_core::vesselness::{
    connected_components, frangi_multiscale, hessian_components, structure_tensor_orientation,
    ScaleSet, VesselnessParams,
};
use fiberseg_core::{GridSpec, LabelVolume, Volume};
use rand::{RngExt, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use common::{axis_angle_deg, binary_cylinder};

#[test]
fn hessian_of_random_quadratics_is_exact_in_the_interior() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(1);
    let n = 32;
    for _ in 0..5 {
        // f = ½ xᵀ A x + bᵀ x on centered coordinates, so the Hessian is A.
        let a: [f64; 6] = std::array::from_fn(|_| rng.random_range(-1.0..1.0));
        let b: [f64; 3] = std::array::from_fn(|_| rng.random_range(-2.0..2.0));
        let c = n as f64 / 2.0;
        let v = Volume::from_fn(GridSpec::cube(n, 1.0).unwrap(), |x, y, z| {
            let (x, y, z) = (x as f64 - c, y as f64 - c, z as f64 - c);
            let q = a[0] * x * x + a[1] * y * y + a[2] * z * z
                + 2.0 * (a[3] * x * y + a[4] * x * z + a[5] * y * z);
            (0.5 * q + b[0] * x + b[1] * y + b[2] * z) as f32
        });
        let sigma = 1.5;
        let h = hessian_components(&v, sigma).unwrap();
        let r = Kernel::radius_for(sigma);
        for z in r..n - r {
            for y in r..n - r {
                for x in r..n - r {
                    let i = v.spec().index(x, y, z);
                    for k in 0..6 {
                        let expected = sigma * sigma * a[k];
                        assert!((h[k][i] - expected).abs() < 1e-3, "component {k}: {} vs {expected}", h[k][i]);
                    }
                }
            }
        }
    }
}

#[test]
fn cylinder_response_peaks_on_axis() {
    let n = 48;
    let r = 3.0;
    let v = binary_cylinder(n, r, 1.0, 0.0);
    let scales = ScaleSet::for_radius(r as f64, 1.0).unwrap();
    let out = frangi_multiscale(&v, &scales, &VesselnessParams::default()).unwrap();
    let c = (n - 1) as f32 / 2.0;
    let sample = |dx: f32| {
        let x = (c + dx).round() as usize;
        let y = c.round() as usize;
        out.get(x, y, n / 2)
    };
    let on_axis = sample(0.0);
    let far = sample(4.0 * r);
    assert!(on_axis > 0.5, "{on_axis}");
    assert!(on_axis > 3.0 * far, "{on_axis} vs {far}");
}

#[test]
fn multiscale_response_stays_in_unit_interval_on_noise() {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(8);
    let spec = GridSpec::cube(20, 1.0).unwrap();
    let data = (0..spec.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let v = Volume::from_vec(spec, data).unwrap();
    let out = frangi_multiscale(&v, &ScaleSet::default(), &VesselnessParams::default()).unwrap();
    assert!(out.data().iter().all(|&x| (0.0..=1.0).contains(&x)));
}

fn cylinder_along(axis: [f64; 3], n: usize, r: f64) -> Volume {
    let c = (n as f64 - 1.0) / 2.0;
    Volume::from_fn(GridSpec::cube(n, 1.0).unwrap(), move |x, y, z| {
        let p = [x as f64 - c, y as f64 - c, z as f64 - c];
        let t = p[0] * axis[0] + p[1] * axis[1] + p[2] * axis[2];
        let d2 = (0..3).map(|k| (p[k] - t * axis[k]).powi(2)).sum::<f64>();
        (-d2 / (2.0 * r * r)).exp() as f32
    })
}

fn max_neighborhood_error(v: &Volume, expected: [f64; 3], radius: f64) -> f64 {
    let o = structure_tensor_orientation(v, 1.0, 2.0).unwrap();
    let n = v.dims()[0];
    let c = (n as f64 - 1.0) / 2.0;
    let mut worst: f64 = 0.0;
    for i in 0..v.spec().len() {
        let [x, y, z] = v.spec().coords(i);
        let p = [x as f64 - c, y as f64 - c, z as f64 - c];
        let t = p[0] * expected[0] + p[1] * expected[1] + p[2] * expected[2];
        let d2 = (0..3).map(|k| (p[k] - t * expected[k]).powi(2)).sum::<f64>();
        if d2.sqrt() <= radius && t.abs() <= 0.25 * n as f64 {
            assert!(o.valid[i]);
            worst = worst.max(axis_angle_deg(o.axes[i], expected));
        }
    }
    worst
}

#[test]
fn orientation_of_cylinder_along_z() {
    let v = cylinder_along([0.0, 0.0, 1.0], 32, 2.0);
    let err = max_neighborhood_error(&v, [0.0, 0.0, 1.0], 2.0);
    assert!(err < 5.0, "{err}°");
}

#[test]
fn orientation_follows_rotation_about_x() {
    // Rotating the z-cylinder by 90° about x maps the axis to y.
    let src = cylinder_along([0.0, 0.0, 1.0], 32, 2.0);
    let spec = *src.spec();
    let n = 32;
    let rotated = Volume::from_fn(spec, |x, y, z| src.get(x, n - 1 - z, y));
    let err = max_neighborhood_error(&rotated, [0.0, 1.0, 0.0], 2.0);
    assert!(err < 5.0, "{err}°");
}

#[test]
fn orientation_of_oblique_cylinder() {
    let a = [1.0, 1.0, 1.0].map(|x: f64| x / 3f64.sqrt());
    let v = cylinder_along(a, 40, 2.0);
    let err = max_neighborhood_error(&v, a, 1.5);
    assert!(err < 5.0, "{err}°");
}

#[test]
fn components_separate_parallel_rods() {
    let spec = GridSpec::new([20, 12, 10], 1.0).unwrap();
    let rods = LabelVolume::from_fn(spec, |_, y, z| {
        u32::from((y == 2 || y == 5 || y == 9) && (3..6).contains(&z))
    });
    let c = connected_components(&rods).unwrap();
    assert_eq!(c.count, 3);
    assert_eq!(c.labels.get(0, 2, 3), 1);
    assert_eq!(c.labels.get(0, 5, 3), 2);
    assert_eq!(c.labels.get(19, 9, 5), 3);
}
