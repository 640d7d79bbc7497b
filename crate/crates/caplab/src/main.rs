fn main() {
    println!("caplab CLI: under construction");
}
