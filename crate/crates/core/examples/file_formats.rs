//! Round trips through the on-disk formats: instances as JSON or CSV,
//! trees as JSON.
//!
//! cargo run --example file_formats

use xcluster::builders::build_uniform;
use xcluster::instances::gen_gaussian_mixture;
use xcluster::io::{read_instance, read_instance_csv, read_tree, tree_to_json, write_instance, write_points_csv, write_tree};
use xcluster::rng::RngStream;

fn main() -> xcluster::error::Result<()> {
    let dir = std::env::temp_dir().join(format!("xcluster-formats-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;

    let inst = gen_gaussian_mixture(3, 2, 5, 0.1, &mut RngStream::new(9))?;
    let json = dir.join("instance.json");
    write_instance(&json, &inst)?;
    assert_eq!(read_instance(&json)?, inst);

    let (points, centers) = (dir.join("points.csv"), dir.join("centers.csv"));
    write_points_csv(&points, &inst.points)?;
    write_points_csv(&centers, inst.centers()?.centers())?;
    let from_csv = read_instance_csv(&points, Some(&centers))?;
    assert_eq!(from_csv.points, inst.points);

    let (tree, _) = build_uniform(inst.centers()?, &mut RngStream::new(1))?;
    let tree_path = dir.join("tree.json");
    write_tree(&tree_path, &tree)?;
    assert_eq!(read_tree(&tree_path)?, tree);

    println!("{}", tree_to_json(&tree)?);
    println!("files in {}", dir.display());
    Ok(())
}
