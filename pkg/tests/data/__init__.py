# Test data fixtures package
