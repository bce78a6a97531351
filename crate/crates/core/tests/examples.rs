//! Runs every quick example so they stay in sync with the library.

macro_rules! example {
    ($name:ident) => {
        #[allow(dead_code)]
        mod $name {
            include!(concat!(
                env!("CARGO_MANIFEST_DIR"),
                "/examples/",
                stringify!($name),
                ".rs"
            ));
        }

        #[test]
        fn $name() {
            $name::run_example().expect(concat!(stringify!($name), " example failed"));
        }
    };
}

example!(simulate_dataset);
example!(gibbs_init);
example!(liu_west_kernel);
example!(weights_and_resampling);
example!(filter_variants);
example!(sis_degeneracy);
