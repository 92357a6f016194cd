fn main() { schatten_fields::probe(); }
