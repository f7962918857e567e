class Counter {
public:
  long count(){
    return 42;
  }
};
