//! Reading and writing the instance format, including positioned errors.
//!
//!     cargo run --example instance_io

use dynmatch::generate::generate_market;
use dynmatch::instance::{parse_instance, serialize_instance};

fn main() {
    let m = generate_market(3, 2, 3);
    let text = serialize_instance(&m);
    print!("{text}");
    assert_eq!(parse_instance(&text).unwrap(), m);

    let sparse = "\
[firms]
acme
[workers]
ann
bob
[firm_utils]
acme bob 2.5
[worker_utils]
bob acme 1/3
[discounts]
* 0.95
";
    let m = parse_instance(sparse).unwrap();
    println!("-- omitted pairs become unacceptable:");
    print!("{}", serialize_instance(&m));

    for broken in [
        sparse.replace("* 0.95", "* 1"),
        sparse.replace("acme bob 2.5", "acme bob 2.5\nacme bob 3"),
        sparse.replace("[discounts]", "[discount]"),
    ] {
        println!("-- {}", parse_instance(&broken).unwrap_err());
    }
}
