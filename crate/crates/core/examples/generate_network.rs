//! Build one network, compare measured properties with the asymptotic
//! formulas and save it.

use clustnet::dist::DiscreteDist;
use clustnet::netgen::{build_network, GenSpec};
use clustnet::netprops::{empirical_clustering, empirical_degree_corr, local_props};

fn main() -> clustnet::Result<()> {
    let spec = GenSpec {
        n: 50_000,
        household: DiscreteDist::poisson_plus(2.0)?,
        global: DiscreteDist::poisson(8.0)?,
        r: 0.8,
        n_q: 10,
        seed: 1,
    };
    let net = build_network(&spec)?;
    let props = local_props(&spec.household, &spec.global, spec.r, spec.n_q)?;

    println!("nodes {}  edges {}  households {}", net.n(), net.edges().len(), net.household_sizes().len());
    println!("clustering  measured {:.4}  asymptotic {:.4}", empirical_clustering(&net)?, props.clustering);
    println!("correlation measured {:.4}  asymptotic {:.4}", empirical_degree_corr(&net)?, props.degree_corr);
    println!("self-loops + parallel edges: {:.4}% of edges", 100.0 * net.imperfection_fraction());

    let path = std::env::temp_dir().join("clustnet_example_network.txt");
    net.write(&path)?;
    println!("written to {}", path.display());
    Ok(())
}
