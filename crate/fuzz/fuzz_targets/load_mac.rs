//! Fuzzes the channel-description JSON loader: arbitrary bytes must either
//! parse into a valid channel or return an error, never panic. Loaded
//! channels must satisfy the row-stochasticity invariant the rest of the
//! library relies on.

#![no_main]

use libfuzzer_sys::fuzz_target;

fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else {
        return;
    };
    if let Ok(mac) = diamond::network::load_mac(text) {
        // every accepted channel must expose a consistent row-stochastic kernel
        assert!(mac.x1_size >= 1 && mac.x2_size >= 1 && mac.y_size >= 1);
        for x1 in 0..mac.x1_size {
            for x2 in 0..mac.x2_size {
                let row: f64 = (0..mac.y_size).map(|y| mac.prob(x1, x2, y)).sum();
                assert!((row - 1.0).abs() <= 1e-6, "row sum {row} at ({x1}, {x2})");
            }
        }
    }
});
