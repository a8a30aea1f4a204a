//! Prints the canonical feature-name manifest.

fn main() {
    print!("{}", moistkit::features::manifest_json());
}
