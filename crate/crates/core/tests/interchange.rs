use c2i_core::ast::{read_interchange, write_interchange, write_interchange_pretty, InterchangeError};
use c2i_core::gen::{random_ast, GenConfig};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const TEN_NODES: &str = r#"{"kind":"FuncDef","children":[
  {"kind":"Decl","params":["f"],"children":[
    {"kind":"TypeDecl","params":["f"],"children":[{"kind":"IdentifierType","params":["int"]}]},
    {"kind":"ParamList"}]},
  {"kind":"Compound","children":[
    {"kind":"Return","children":[
      {"kind":"BinaryOp","params":["+"],"children":[
        {"kind":"ID","params":["x"]},
        {"kind":"Constant","params":["int","1"]}]}]}]}]}"#;

#[test]
fn hand_written_document() {
    let ast = read_interchange(TEN_NODES).unwrap();
    assert_eq!(ast.node_count(), 10);
    assert_eq!(ast.depth(), 4);
    assert_eq!(ast.level_widths(), [1, 2, 3, 2, 2]);
    let canonical = write_interchange(&ast);
    assert_eq!(read_interchange(&canonical).unwrap(), ast);
    assert_eq!(write_interchange(&read_interchange(&canonical).unwrap()), canonical);
    assert!(canonical.starts_with(r#"{"kind":"FuncDef","params":[],"children":[{"kind":"Decl","params":["f"]"#));
}

#[test]
fn schema_errors_carry_paths() {
    let err = read_interchange(r#"{"kind":"A","children":[{"kind":"B","params":["a","b","c","d"]}]}"#).unwrap_err();
    match err {
        InterchangeError::Schema { path, .. } => assert_eq!(path, "$.children[0]"),
        other => panic!("unexpected {other:?}"),
    }
    assert!(matches!(read_interchange(r#"{"kind":"","children":[]}"#), Err(InterchangeError::Schema { .. })));
    assert!(matches!(read_interchange("{\"kind\":\"A\"} x"), Err(InterchangeError::Malformed { .. })));
    assert!(matches!(read_interchange("[1]"), Err(InterchangeError::Malformed { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn write_read_identity(seed in any::<u64>()) {
        let ast = random_ast(&mut ChaCha8Rng::seed_from_u64(seed), &GenConfig::default());
        prop_assert_eq!(&read_interchange(&write_interchange(&ast)).unwrap(), &ast);
        prop_assert_eq!(&read_interchange(&write_interchange_pretty(&ast)).unwrap(), &ast);
    }
}
