//! Builds the LoS channel of the reference room and its zero-forcing basis.
//!
//! ```text
//! cargo run --example channel_matrix
//! ```

use vlc_shaper::channel::{build_channel_matrix, reference_room, ChannelParams};
use vlc_shaper::zf_ao::zf_basis;

fn main() -> vlc_shaper::Result<()> {
    let params = ChannelParams::reference();
    let (leds, users) = reference_room();
    let h = build_channel_matrix(&leds, &users, &params)?;

    println!("Lambertian order: {}", params.lambertian_order());
    for k in 0..h.users() {
        let row: Vec<String> = h.row(k).iter().map(|g| format!("{g:.4e}")).collect();
        println!("user {} at {:?}: [{}]", k + 1, users[k].as_slice(), row.join(", "));
    }

    let basis = zf_basis(&h)?;
    println!("effective ZF gains: {:?}", basis.gains());
    println!("ZF precoder at unit gains:\n{}", basis.precoder(&[1.0, 1.0])?.as_matrix());
    Ok(())
}
