# verify package
