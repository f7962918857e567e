class Counter {
public:
  int count(){
    return 42;
  }
};
