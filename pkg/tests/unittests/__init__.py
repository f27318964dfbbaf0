# Initialize the test package