// scratch performance probe (removed before release)
use num_complex::Complex64 as C64;
use squeezed_ladder::dynamics::*;
use squeezed_ladder::hamiltonians::*;
use squeezed_ladder::hilbert::*;
use std::f64::consts::TAU;
use std::time::Instant;

fn main() {
    let dim = 96usize;
    let sp = FockSpace::new(dim).unwrap();
    let zeta = SqueezeParams::new(1.0, 0.0).unwrap();
    let (k, _) = engineered_lowering(zeta, C64::new(0.0, 0.0), sp).unwrap();
    let omega = TAU * 4.3e3;
    let h = engineered(EngineeredSign::Plus, DriveParams::new(omega, 0.0).unwrap(), &k)
        .unwrap()
        .add(&detuning_term(TAU * 30.0, sp))
        .unwrap();
    let noise = NoiseParams::new(TAU * 30.0, TAU * 10.7, TAU * 5.0).unwrap();
    let jumps = jump_operators(&noise, sp);

    // start in |↓⟩|ζ,6⟩ built via matrix column (tail-unchecked here, probing speed only)
    let s = make_squeeze(zeta, sp).unwrap();
    let col = s.matrix().column(6).to_owned();
    let psi = SpinOscState::from_oscillator(Spin::Down, &col, sp).unwrap();
    let rho0 = SpinOscDensity::from_pure(&psi);

    let t0 = Instant::now();
    let mut count = 0usize;
    evolve_lindblad_observe(&h, &jumps, &rho0, 1.5e-3, 151, |_t, rho| {
        count += 1;
        let _ = rho.p_down();
        Ok(())
    })
    .unwrap();
    println!("dim {dim}: 1.5 ms probe, {count} samples: {:?}", t0.elapsed());
}
