pub mod cellfree_oracle;
